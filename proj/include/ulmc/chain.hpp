#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ulmc/core.hpp"
#include "ulmc/diagnostics.hpp"
#include "ulmc/integrators.hpp"
#include "ulmc/mh.hpp"
#include "ulmc/rng.hpp"
#include "ulmc/target.hpp"

namespace ulmc {

enum class Correction { none, per_step, multi_step };

std::string to_string(Correction c);
std::optional<Correction> parse_correction(std::string_view name);

struct ChainOptions {
  IntegratorKind integrator = IntegratorKind::obabo;
  Correction correction = Correction::per_step;
  int multi_step_n = 10;            // inner steps per deferred-acceptance round
  bool use_minibatch = false;
  std::int64_t batch_size = 0;      // must divide the target's data size when minibatching
  bool pre_draw_noise = false;      // draw a round's noise up front (zeta augmentation)
  bool resample_momentum_between_rounds = false;
  std::int64_t sample_stride = 1;   // keep every k-th sample in memory
  std::uint64_t seed = 0;
  std::uint64_t chain_id = 0;
};

struct SampleRow {
  std::int64_t step = 0;
  Vector position;
  Vector momentum;
  double potential = 0.0;
  double kinetic = 0.0;
  double log_alpha = 0.0;   // NaN when no correction is applied
  bool accepted = true;
};

// One Markov chain: owns its state, noise stream and minibatch schedule.
// advance() performs one transition of the outer chain (a single integrator
// step, or a whole round of multi_step_n steps in deferred mode).
class Chain {
 public:
  Chain(TargetModel target, SamplerConfig config, ChainOptions options, Vector initial_position);

  // False signals numerical blow-up in an uncorrected run; the chain stops
  // advancing and keeps the partial history.
  bool advance();

  void run(std::int64_t outer_steps);

  const PhaseState& state() const { return state_; }
  const std::vector<SampleRow>& samples() const { return samples_; }
  const std::vector<AcceptanceRecord>& records() const { return records_; }
  const TargetModel& target() const { return target_; }
  const SamplerConfig& config() const { return config_; }
  const ChainOptions& options() const { return options_; }
  bool failed() const { return failed_; }

  ChainSummary summary() const;

 private:
  bool advance_euler_maruyama();
  bool advance_sgld();
  bool advance_single_step();   // obabo or leapfrog, optional per-step correction
  bool advance_multi_step();

  StepResult integrator_step(const GradientSource& gradient);
  void record_sample(std::int64_t step, double log_alpha, bool accepted);
  std::vector<std::int64_t> palindromic_batches(int n_steps,
                                                std::vector<std::vector<std::int64_t>>& out);

  TargetModel target_;
  SamplerConfig config_;
  ChainOptions options_;
  PhaseState state_;
  NoiseStream stream_;
  std::optional<MinibatchSchedule> schedule_;
  std::optional<double> cached_potential_;   // U(theta) at the current state, exact
  std::optional<Vector> cached_gradient_;    // grad U(theta) at the current state, exact
  std::vector<SampleRow> samples_;
  std::vector<AcceptanceRecord> records_;
  std::int64_t outer_step_ = 0;
  bool failed_ = false;
};

}  // namespace ulmc
