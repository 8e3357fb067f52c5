#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ulmc {

using Vector = std::vector<double>;

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

bool all_finite(std::span<const double> v);

// Full state of the chain: parameter position plus auxiliary momentum of the
// same dimension. The chain never admits NaN/Inf entries; proposals that
// produce them are rejected upstream.
struct PhaseState {
  Vector position;
  Vector momentum;

  std::size_t dim() const { return position.size(); }
};

bool is_finite(const PhaseState& state);

// Diagonal positive-definite preconditioner. apply/inverse/sqrt variants are
// mutually consistent: sqrt_apply(sqrt_apply(v)) == apply(v).
class MassMatrix {
 public:
  MassMatrix() = default;
  explicit MassMatrix(Vector diagonal);

  static MassMatrix identity(std::size_t dim);

  std::size_t dim() const { return diag_.size(); }
  const Vector& diagonal() const { return diag_; }

  Vector apply(std::span<const double> v) const;
  Vector inverse_apply(std::span<const double> v) const;
  Vector sqrt_apply(std::span<const double> v) const;
  Vector inverse_sqrt_apply(std::span<const double> v) const;

 private:
  Vector diag_;
};

struct SamplerConfig {
  double step_size = 0.1;     // h > 0
  double friction = 1.0;      // gamma >= 0; the SGLD integrator covers the infinite-friction limit
  double temperature = 1.0;   // T > 0
  MassMatrix mass;

  void validate(std::size_t dim) const;
};

// K(m) = 1/2 m^T M^{-1} m. Zero iff m is the zero vector.
double kinetic_energy(std::span<const double> momentum, const MassMatrix& mass);

struct TargetModel;

// Unnormalized log density of the joint stationary distribution,
// -(U(theta) + K(m)) / T. Non-finite potentials propagate to the caller.
double log_boltzmann(const PhaseState& state, const TargetModel& target,
                     const SamplerConfig& config);

PhaseState negate_momentum(PhaseState state);

}  // namespace ulmc
