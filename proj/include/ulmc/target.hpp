#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ulmc/core.hpp"
#include "ulmc/rng.hpp"

namespace ulmc {

// A target distribution through its potential energy U(theta) = -log density,
// with exact full-data gradients and a stochastic minibatch estimator.
// minibatch_grad over the full index set equals grad; over uniformly drawn
// batches it is unbiased for grad.
struct TargetModel {
  std::string name;
  std::size_t dim = 0;
  std::int64_t data_size = 1;

  std::function<double(std::span<const double>)> potential;
  std::function<Vector(std::span<const double>)> grad;
  std::function<Vector(std::span<const double>, std::span<const std::int64_t>)> minibatch_grad;
};

// Independent-coordinate Gaussian: U = sum_i (theta_i - mean_i)^2 / (2 var_i).
TargetModel make_gaussian(Vector mean, Vector variances);

// Rosenbrock-type warp of a 2D Gaussian:
// U(t1,t2) = t1^2/(2 scale^2) + (t2 - curvature*(t1^2 - scale^2))^2 / 2.
TargetModel make_banana(double curvature, double scale);

// Bayesian logistic regression with Gaussian prior:
// U = sum_n log(1 + exp(-y_n x_n^T theta)) + prior_precision/2 * |theta|^2,
// labels in {0,1} mapped to y in {-1,+1}. Features are row-major N x p.
TargetModel make_logistic_regression(std::vector<double> features, std::vector<int> labels,
                                     std::size_t n, std::size_t p, double prior_precision);

struct SyntheticLogisticParams {
  std::int64_t n = 500;
  std::size_t p = 2;
  std::uint64_t seed = 1;
  double signal = 1.0;          // scale of the generating coefficient vector
  double label_noise = 0.0;     // probability of flipping each label
  double prior_precision = 1.0;
};

// Deterministic synthetic data: features ~ N(0,1), coefficients drawn from the
// seed, labels Bernoulli(sigmoid(x^T theta*)) with optional flips.
TargetModel make_synthetic_logistic(const SyntheticLogisticParams& params);

// Epoch-permutation minibatching: every epoch visits each data index exactly
// once, in an order reshuffled deterministically from the seed.
class MinibatchSchedule {
 public:
  MinibatchSchedule(std::int64_t data_size, std::int64_t batch_size, std::uint64_t seed);

  std::int64_t batch_size() const { return batch_size_; }
  std::int64_t batches_per_epoch() const { return data_size_ / batch_size_; }

  std::vector<std::int64_t> next_batch();

 private:
  void reshuffle();

  std::int64_t data_size_;
  std::int64_t batch_size_;
  std::vector<std::int64_t> permutation_;
  std::int64_t cursor_ = 0;
  NoiseStream stream_;
};

}  // namespace ulmc
