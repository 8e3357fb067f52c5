#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ulmc/chain.hpp"
#include "ulmc/diagnostics.hpp"

namespace ulmc {

// A fully specified run, buildable from flat key=value pairs (the config-file
// and C API surface). Unknown keys are rejected.
struct RunSpec {
  std::string target_name = "gaussian";   // gaussian | banana | logistic
  Vector gaussian_mean;                   // empty: zeros
  Vector gaussian_variance = {1.0};
  double banana_curvature = 0.5;
  double banana_scale = 1.0;
  SyntheticLogisticParams logistic;

  IntegratorKind integrator = IntegratorKind::obabo;
  Correction correction = Correction::per_step;
  int multi_step_n = 10;
  std::int64_t steps = 1000;
  std::int64_t chains = 1;
  std::uint64_t seed = 0;

  // Exactly one parameterization may be given; sgd-native values are mapped to
  // (step_size, friction) before running.
  std::optional<double> step_size;
  std::optional<double> friction;
  std::optional<double> learning_rate;
  std::optional<double> momentum;

  double temperature = 1.0;
  Vector mass_diagonal;                   // empty: identity
  Vector initial_position;                // empty: zeros

  std::string gradient_mode = "exact";    // exact | minibatch
  std::int64_t batch_size = 0;
  bool pre_draw_noise = false;
  bool resample_momentum_between_rounds = false;

  std::string out_prefix;                 // empty: no files written
  std::int64_t thin = 0;                  // 0: auto so the samples file stays <= 1e5 rows
};

struct unknown_key_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parse "key = value" pairs; later assignments override earlier ones.
void apply_key_value(RunSpec& spec, const std::string& key, const std::string& value);
RunSpec spec_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

struct RunResult {
  ChainSummary pooled;                    // all chains concatenated in chain order
  std::vector<ChainSummary> per_chain;
  double kinetic_temperature = 0.0;
  double wall_seconds = 0.0;
  bool blew_up = false;                   // uncorrected run hit a non-finite value
  std::string samples_path;
  std::string summary_path;
};

TargetModel build_target(const RunSpec& spec);
// Resolves whichever parameterization the spec carries into sampler-native
// values; rejects mixed parameterizations.
SamplerConfig build_config(const RunSpec& spec, const TargetModel& target);

// Validates the spec, runs `chains` independent chains (one thread each),
// writes the samples and summary files when out_prefix is set, and returns the
// pooled diagnostics. Identical spec and seed give byte-identical files.
RunResult run(const RunSpec& spec);

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> axis_values;
  RunSpec spec;
};

struct SweepCellResult {
  std::vector<std::pair<std::string, std::string>> axis_values;
  bool ok = false;
  std::string error;
  double acceptance_rate = 0.0;
  double mean_potential = 0.0;
  double mean_kinetic = 0.0;
};

// Runs every cell (in parallel), collecting per-cell outcomes; cell failures
// are recorded and do not abort the sweep.
std::vector<SweepCellResult> sweep(const std::vector<SweepCell>& cells);

// Combined sweep table as CSV. Row order follows the input cells.
void write_sweep_table(const std::vector<SweepCellResult>& results, const std::string& path);

// Shared float formatting: shortest representation that round-trips.
std::string format_double(double value);

}  // namespace ulmc
