#include "ulmc/core.hpp"

#include <cmath>

#include "ulmc/target.hpp"

namespace ulmc {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool is_finite(const PhaseState& state) {
  return all_finite(state.position) && all_finite(state.momentum);
}

MassMatrix::MassMatrix(Vector diagonal) : diag_(std::move(diagonal)) {
  if (diag_.empty()) throw std::invalid_argument("mass matrix must not be empty");
  for (double d : diag_) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw std::invalid_argument("mass matrix entries must be positive and finite");
    }
  }
}

MassMatrix MassMatrix::identity(std::size_t dim) { return MassMatrix(Vector(dim, 1.0)); }

namespace {

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw dimension_error(std::string(what) + ": dimension mismatch (" + std::to_string(got) +
                          " vs " + std::to_string(want) + ")");
  }
}

}  // namespace

Vector MassMatrix::apply(std::span<const double> v) const {
  require_dim(v.size(), diag_.size(), "MassMatrix::apply");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag_[i] * v[i];
  return out;
}

Vector MassMatrix::inverse_apply(std::span<const double> v) const {
  require_dim(v.size(), diag_.size(), "MassMatrix::inverse_apply");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / diag_[i];
  return out;
}

Vector MassMatrix::sqrt_apply(std::span<const double> v) const {
  require_dim(v.size(), diag_.size(), "MassMatrix::sqrt_apply");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::sqrt(diag_[i]) * v[i];
  return out;
}

Vector MassMatrix::inverse_sqrt_apply(std::span<const double> v) const {
  require_dim(v.size(), diag_.size(), "MassMatrix::inverse_sqrt_apply");
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / std::sqrt(diag_[i]);
  return out;
}

void SamplerConfig::validate(std::size_t dim) const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("step_size must be positive and finite");
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw std::invalid_argument("friction must be nonnegative and finite");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw std::invalid_argument("temperature must be positive and finite");
  }
  require_dim(mass.dim(), dim, "SamplerConfig");
}

double kinetic_energy(std::span<const double> momentum, const MassMatrix& mass) {
  require_dim(momentum.size(), mass.dim(), "kinetic_energy");
  const Vector& diag = mass.diagonal();
  double sum = 0.0;
  for (std::size_t i = 0; i < momentum.size(); ++i) {
    sum += momentum[i] * momentum[i] / diag[i];
  }
  return 0.5 * sum;
}

double log_boltzmann(const PhaseState& state, const TargetModel& target,
                     const SamplerConfig& config) {
  require_dim(state.momentum.size(), state.position.size(), "log_boltzmann");
  const double potential = target.potential(state.position);
  const double kinetic = kinetic_energy(state.momentum, config.mass);
  return -(potential + kinetic) / config.temperature;
}

PhaseState negate_momentum(PhaseState state) {
  for (double& m : state.momentum) m = -m;
  return state;
}

}  // namespace ulmc
