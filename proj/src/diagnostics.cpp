#include "ulmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ulmc {

namespace {

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

}  // namespace

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("effective_sample_size: need at least 2 samples");

  const double mean = mean_of(series);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  // Constant series up to rounding of the mean: degenerate floor.
  if (c0 <= 1e-28 * (1.0 + mean * mean)) return 1.0;

  // Initial-positive-sequence truncation: sum successive autocorrelation
  // pairs while they stay positive.
  const std::size_t max_lag = std::min<std::size_t>(n - 1, 20000);
  auto rho = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (series[i] - mean) * (series[i + lag] - mean);
    return c / (static_cast<double>(n) * c0);
  };

  double tau = 1.0;
  for (std::size_t lag = 1; lag + 1 <= max_lag; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  double ess = static_cast<double>(n) / tau;
  ess = std::min(ess, static_cast<double>(n));
  return std::max(ess, 1.0);
}

ChainSummary summarize(std::span<const double> samples, std::size_t dim,
                       std::span<const double> potentials, std::span<const double> kinetics,
                       std::span<const AcceptanceRecord> records) {
  if (dim == 0 || samples.size() % dim != 0) {
    throw std::invalid_argument("summarize: samples must be n x dim");
  }
  const std::size_t n = samples.size() / dim;
  if (n < 2) throw std::invalid_argument("summarize: need at least 2 samples");

  ChainSummary out;
  out.n_samples = n;
  out.mean.assign(dim, 0.0);
  out.variance.assign(dim, 0.0);
  out.ess.assign(dim, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) out.mean[j] += samples[i * dim + j];
  }
  for (std::size_t j = 0; j < dim; ++j) out.mean[j] /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double r = samples[i * dim + j] - out.mean[j];
      out.variance[j] += r * r;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) out.variance[j] /= static_cast<double>(n - 1);

  std::vector<double> column(n);
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < n; ++i) column[i] = samples[i * dim + j];
    out.ess[j] = effective_sample_size(column);
  }

  out.mean_potential = mean_of(potentials);
  out.mean_kinetic = mean_of(kinetics);

  if (!records.empty()) {
    std::size_t accepted = 0;
    for (const auto& r : records) accepted += r.accepted ? 1 : 0;
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(records.size());
  }
  return out;
}

double kinetic_temperature(std::span<const double> momenta, std::size_t dim,
                           const MassMatrix& mass) {
  if (dim == 0 || momenta.size() % dim != 0) {
    throw std::invalid_argument("kinetic_temperature: momenta must be n x dim");
  }
  const std::size_t n = momenta.size() / dim;
  if (n < 2) throw std::invalid_argument("kinetic_temperature: need at least 2 samples");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += kinetic_energy(momenta.subspan(i * dim, dim), mass);
  }
  const double mean_kinetic = total / static_cast<double>(n);
  return 2.0 * mean_kinetic / static_cast<double>(dim);
}

}  // namespace ulmc
