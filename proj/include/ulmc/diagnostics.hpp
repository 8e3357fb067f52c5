#pragma once

#include <span>
#include <vector>

#include "ulmc/core.hpp"
#include "ulmc/mh.hpp"

namespace ulmc {

struct ChainSummary {
  Vector mean;                  // per coordinate
  Vector variance;              // unbiased, per coordinate
  Vector ess;                   // per coordinate, in (0, n]
  double acceptance_rate = 0.0;
  double mean_potential = 0.0;
  double mean_kinetic = 0.0;
  std::size_t n_samples = 0;
};

// Effective sample size from the initial-positive-sequence truncation of the
// autocorrelation function. Degenerate (constant) series report 1.
double effective_sample_size(std::span<const double> series);

// Moments, ESS and acceptance statistics of a finished chain. samples is
// row-major n x dim. Requires n >= 2. Mean and variance are order-invariant;
// ESS is not.
ChainSummary summarize(std::span<const double> samples, std::size_t dim,
                       std::span<const double> potentials, std::span<const double> kinetics,
                       std::span<const AcceptanceRecord> records);

// Temperature estimator 2 E[K] / d from momentum samples; at stationarity the
// momenta are N(0, T M) so this is consistent for T.
double kinetic_temperature(std::span<const double> momenta, std::size_t dim,
                           const MassMatrix& mass);

}  // namespace ulmc
