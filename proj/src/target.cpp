#include "ulmc/target.hpp"

#include <cmath>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace ulmc {

namespace {

// log(1 + exp(t)) without overflow for large |t|.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw dimension_error(std::string(what) + ": dimension mismatch");
}

}  // namespace

TargetModel make_gaussian(Vector mean, Vector variances) {
  if (mean.size() != variances.size() || mean.empty()) {
    throw std::invalid_argument("make_gaussian: mean and variances must have equal nonzero size");
  }
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("make_gaussian: variances must be positive and finite");
    }
  }
  const std::size_t d = mean.size();

  TargetModel model;
  model.name = "gaussian";
  model.dim = d;
  model.data_size = 1;
  model.potential = [mean, variances, d](std::span<const double> theta) {
    check_dim(theta.size(), d, "gaussian potential");
    double u = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double r = theta[i] - mean[i];
      u += r * r / (2.0 * variances[i]);
    }
    return u;
  };
  model.grad = [mean, variances, d](std::span<const double> theta) {
    check_dim(theta.size(), d, "gaussian grad");
    Vector g(d);
    for (std::size_t i = 0; i < d; ++i) g[i] = (theta[i] - mean[i]) / variances[i];
    return g;
  };
  model.minibatch_grad = [grad = model.grad](std::span<const double> theta,
                                             std::span<const std::int64_t>) {
    return grad(theta);
  };
  return model;
}

TargetModel make_banana(double curvature, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(curvature)) {
    throw std::invalid_argument("make_banana: scale must be positive, parameters finite");
  }

  TargetModel model;
  model.name = "banana";
  model.dim = 2;
  model.data_size = 1;
  model.potential = [curvature, scale](std::span<const double> theta) {
    check_dim(theta.size(), 2, "banana potential");
    const double warp = theta[1] - curvature * (theta[0] * theta[0] - scale * scale);
    return theta[0] * theta[0] / (2.0 * scale * scale) + 0.5 * warp * warp;
  };
  model.grad = [curvature, scale](std::span<const double> theta) {
    check_dim(theta.size(), 2, "banana grad");
    const double warp = theta[1] - curvature * (theta[0] * theta[0] - scale * scale);
    Vector g(2);
    g[0] = theta[0] / (scale * scale) - 2.0 * curvature * theta[0] * warp;
    g[1] = warp;
    return g;
  };
  model.minibatch_grad = [grad = model.grad](std::span<const double> theta,
                                             std::span<const std::int64_t>) {
    return grad(theta);
  };
  return model;
}

TargetModel make_logistic_regression(std::vector<double> features, std::vector<int> labels,
                                     std::size_t n, std::size_t p, double prior_precision) {
  if (n < 1 || p < 1) throw std::invalid_argument("logistic regression: need n >= 1, p >= 1");
  if (features.size() != n * p) {
    throw dimension_error("logistic regression: features must be n*p row-major");
  }
  if (labels.size() != n) throw dimension_error("logistic regression: labels must have size n");
  if (!(prior_precision >= 0.0) || !std::isfinite(prior_precision)) {
    throw std::invalid_argument("logistic regression: prior_precision must be >= 0");
  }
  // Labels {0,1} map to signs {-1,+1}.
  std::vector<double> sign(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw std::invalid_argument("logistic regression: labels must be 0 or 1");
    }
    sign[i] = labels[i] == 1 ? 1.0 : -1.0;
  }

  auto data = std::make_shared<std::pair<std::vector<double>, std::vector<double>>>(
      std::move(features), std::move(sign));

  TargetModel model;
  model.name = "logistic";
  model.dim = p;
  model.data_size = static_cast<std::int64_t>(n);

  model.potential = [data, n, p, prior_precision](std::span<const double> theta) {
    check_dim(theta.size(), p, "logistic potential");
    const auto& x = data->first;
    const auto& y = data->second;
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < p; ++j) dot += x[i * p + j] * theta[j];
      u += log1p_exp(-y[i] * dot);
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < p; ++j) sq += theta[j] * theta[j];
    return u + 0.5 * prior_precision * sq;
  };

  // Shared per-point accumulation; the minibatch path rescales the data term
  // by N / batch and always adds the full prior gradient.
  auto accumulate = [data, p](std::span<const double> theta, std::span<const std::int64_t> idx,
                              Vector& g) {
    const auto& x = data->first;
    const auto& y = data->second;
    for (std::int64_t i : idx) {
      double dot = 0.0;
      for (std::size_t j = 0; j < p; ++j) dot += x[i * p + j] * theta[j];
      const double w = -y[i] * sigmoid(-y[i] * dot);
      for (std::size_t j = 0; j < p; ++j) g[j] += w * x[i * p + j];
    }
  };

  std::vector<std::int64_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  model.grad = [accumulate, all, n, p, prior_precision](std::span<const double> theta) {
    check_dim(theta.size(), p, "logistic grad");
    Vector g(p, 0.0);
    accumulate(theta, all, g);
    for (std::size_t j = 0; j < p; ++j) g[j] += prior_precision * theta[j];
    return g;
  };

  model.minibatch_grad = [accumulate, n, p, prior_precision](std::span<const double> theta,
                                                             std::span<const std::int64_t> idx) {
    check_dim(theta.size(), p, "logistic minibatch grad");
    if (idx.empty()) throw std::invalid_argument("logistic minibatch grad: empty batch");
    Vector g(p, 0.0);
    accumulate(theta, idx, g);
    const double scale = static_cast<double>(n) / static_cast<double>(idx.size());
    for (std::size_t j = 0; j < p; ++j) g[j] = scale * g[j] + prior_precision * theta[j];
    return g;
  };
  return model;
}

TargetModel make_synthetic_logistic(const SyntheticLogisticParams& params) {
  if (params.n < 1 || params.p < 1) {
    throw std::invalid_argument("synthetic logistic: need n >= 1, p >= 1");
  }
  if (params.label_noise < 0.0 || params.label_noise >= 0.5) {
    throw std::invalid_argument("synthetic logistic: label_noise must be in [0, 0.5)");
  }
  const auto n = static_cast<std::size_t>(params.n);
  const std::size_t p = params.p;

  NoiseStream coef_stream(params.seed, 101);
  NoiseStream feature_stream(params.seed, 102);
  NoiseStream label_stream(params.seed, 103);

  Vector truth(p);
  for (std::size_t j = 0; j < p; ++j) truth[j] = params.signal * coef_stream.normal();

  std::vector<double> features(n * p);
  for (auto& x : features) x = feature_stream.normal();

  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < p; ++j) dot += features[i * p + j] * truth[j];
    int y = label_stream.uniform01() < sigmoid(dot) ? 1 : 0;
    if (params.label_noise > 0.0 && label_stream.uniform01() < params.label_noise) y = 1 - y;
    labels[i] = y;
  }

  TargetModel model = make_logistic_regression(std::move(features), std::move(labels), n, p,
                                               params.prior_precision);
  model.name = "logistic";
  return model;
}

MinibatchSchedule::MinibatchSchedule(std::int64_t data_size, std::int64_t batch_size,
                                     std::uint64_t seed)
    : data_size_(data_size), batch_size_(batch_size), stream_(seed, 7) {
  if (data_size < 1 || batch_size < 1) {
    throw std::invalid_argument("minibatch schedule: sizes must be positive");
  }
  if (data_size % batch_size != 0) {
    throw std::invalid_argument("minibatch schedule: batch_size must divide data_size");
  }
  permutation_.resize(static_cast<std::size_t>(data_size));
  std::iota(permutation_.begin(), permutation_.end(), 0);
  reshuffle();
}

void MinibatchSchedule::reshuffle() {
  // Fisher-Yates on the counter stream; std::shuffle is implementation
  // defined and would break cross-toolchain reproducibility.
  for (std::size_t i = permutation_.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream_.uniform_below(i));
    std::swap(permutation_[i - 1], permutation_[j]);
  }
  cursor_ = 0;
}

std::vector<std::int64_t> MinibatchSchedule::next_batch() {
  if (cursor_ >= data_size_) reshuffle();
  const auto begin = permutation_.begin() + cursor_;
  std::vector<std::int64_t> batch(begin, begin + batch_size_);
  cursor_ += batch_size_;
  return batch;
}

}  // namespace ulmc
