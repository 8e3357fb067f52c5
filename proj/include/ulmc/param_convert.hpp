#pragma once

#include <cstdint>
#include <optional>

namespace ulmc {

// Gradient-descent-native hyperparameters: learning rate and momentum, with
// the training-set size they refer to.
struct SGDParams {
  double learning_rate = 0.0;  // > 0
  double momentum = 0.0;       // in [0, 1)
  std::int64_t data_size = 1;  // >= 1
};

struct SamplerParams {
  double step_size = 0.0;
  double friction = 0.0;
};

// h = sqrt(lr / N), gamma = -sqrt(N / lr) * log(momentum). momentum == 0 has
// no finite friction: nullopt signals the infinite-friction (SGLD) limit.
std::optional<SamplerParams> sgd_to_sampler(const SGDParams& params);

// lr = N h^2, momentum = exp(-gamma h). friction == 0 maps to the momentum = 1
// boundary (pure Hamiltonian regime, outside the SGDParams domain).
SGDParams sampler_to_sgd(double step_size, double friction, std::int64_t data_size);

// Variant for the first-order Euler discretization, where the momentum factor
// per step is 1 - gamma h instead of exp(-gamma h):
// gamma = (1 - momentum) * sqrt(N / lr).
SamplerParams sgd_to_em_sampler(const SGDParams& params);

SGDParams em_sampler_to_sgd(double step_size, double friction, std::int64_t data_size);

}  // namespace ulmc
