#include "ulmc/param_convert.hpp"

#include <cmath>
#include <stdexcept>

namespace ulmc {

namespace {

void validate(const SGDParams& params) {
  if (!(params.learning_rate > 0.0) || !std::isfinite(params.learning_rate)) {
    throw std::invalid_argument("learning_rate must be positive and finite");
  }
  if (!(params.momentum >= 0.0) || params.momentum >= 1.0) {
    throw std::invalid_argument("momentum must lie in [0, 1)");
  }
  if (params.data_size < 1) throw std::invalid_argument("data_size must be >= 1");
}

}  // namespace

std::optional<SamplerParams> sgd_to_sampler(const SGDParams& params) {
  validate(params);
  const double n = static_cast<double>(params.data_size);
  const double step = std::sqrt(params.learning_rate / n);
  if (params.momentum == 0.0) return std::nullopt;  // infinite friction: use the sgld integrator
  return SamplerParams{step, -std::log(params.momentum) / step};
}

SGDParams sampler_to_sgd(double step_size, double friction, std::int64_t data_size) {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("step_size must be positive and finite");
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw std::invalid_argument("friction must be nonnegative and finite");
  }
  if (data_size < 1) throw std::invalid_argument("data_size must be >= 1");
  SGDParams out;
  out.data_size = data_size;
  out.learning_rate = static_cast<double>(data_size) * step_size * step_size;
  out.momentum = std::exp(-friction * step_size);  // friction == 0 gives the momentum = 1 boundary
  return out;
}

SamplerParams sgd_to_em_sampler(const SGDParams& params) {
  validate(params);
  const double n = static_cast<double>(params.data_size);
  const double step = std::sqrt(params.learning_rate / n);
  return SamplerParams{step, (1.0 - params.momentum) / step};
}

SGDParams em_sampler_to_sgd(double step_size, double friction, std::int64_t data_size) {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument("step_size must be positive and finite");
  }
  if (!(friction >= 0.0) || !std::isfinite(friction)) {
    throw std::invalid_argument("friction must be nonnegative and finite");
  }
  if (data_size < 1) throw std::invalid_argument("data_size must be >= 1");
  SGDParams out;
  out.data_size = data_size;
  out.learning_rate = static_cast<double>(data_size) * step_size * step_size;
  out.momentum = 1.0 - friction * step_size;
  if (out.momentum < 0.0) {
    throw std::invalid_argument("friction * step_size exceeds 1: no first-order momentum exists");
  }
  return out;
}

}  // namespace ulmc
