#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ulmc/core.hpp"
#include "ulmc/integrators.hpp"
#include "ulmc/rng.hpp"
#include "ulmc/target.hpp"

namespace ulmc {

// Outcome of one accept/reject decision. log_alpha is the log ratio before
// min(1, .); it is recomputable from the stored energies as
// -(dU + dK_quarter) / T. For a multi-step round the kinetic fields hold the
// sums over the inner steps.
struct AcceptanceRecord {
  double log_alpha = 0.0;
  bool accepted = false;
  double potential_start = 0.0;
  double potential_end = 0.0;
  double kinetic_quarter = 0.0;
  double kinetic_three_quarter = 0.0;
  bool forced_rejection = false;       // non-finite value encountered mid-proposal
  bool degenerate_friction = false;    // transition-ratio oracle fell back to the zero-friction limit
  bool schedule_asymmetric = false;    // multi-step schedule failed the symmetry check
};

// Log acceptance ratio of one splitting step:
//   -(U_end - U_start + K(m_{3/4}) - K(m_{1/4})) / T.
// Depends only on the inner B.1/A/B.2 stages; the friction does not appear.
// Non-finite inputs yield -inf (forced rejection).
double ggmc_log_accept(const StepTrace& trace, double potential_start, double potential_end,
                       const SamplerConfig& config);

// The same quantity computed from first principles: log Boltzmann ratio of the
// endpoint states plus the log ratio of backward to forward transition
// densities, each built from the explicit Gaussian densities of the two
// O-stage increments (covariance (1-a) T M). The position Jacobian factor is
// a constant and cancels in the ratio. With friction == 0 the increment
// Gaussians degenerate; the zero-friction limit (the inner-step ratio alone)
// is returned and *degenerate is set.
double oracle_log_accept(const PhaseState& start, const PhaseState& end, const StepTrace& trace,
                         const TargetModel& target, const SamplerConfig& config,
                         bool normalized_densities = true, bool* degenerate = nullptr);

// Log acceptance ratio for an Euler-Maruyama step: -inf unless the backward
// move is realizable (m unchanged, a probability-zero event for h > 0), in
// which case the Gaussian transition densities of the momentum updates are
// finite and the ratio is computed directly. Exists to demonstrate that the
// scheme cannot be Metropolis-corrected.
double em_log_accept(const PhaseState& start, const PhaseState& end, const TargetModel& target,
                     const SamplerConfig& config);

struct EnergyBreakdown {
  double potential_start = 0.0;
  double potential_end = 0.0;
  double kinetic_quarter = 0.0;
  double kinetic_three_quarter = 0.0;
};

// Metropolis decision with uniform draw u in (0,1): accept the proposal iff
// log(u) < log_alpha. On rejection the retained state is the pre-step
// position with negated momentum; a rejected trajectory must reverse for the
// chain to leave the target invariant.
std::pair<PhaseState, AcceptanceRecord> accept_reject(const PhaseState& current,
                                                      const PhaseState& proposal,
                                                      double log_alpha, double uniform_draw,
                                                      const EnergyBreakdown& energies);

// Per-step entry of a multi-step schedule. noise_law identifies the law of the
// step's randomness (0 for a fresh standard-normal draw; minibatch steps use a
// fingerprint of the batch). The schedule must equal its own reversal for the
// deferred acceptance ratio to be nonzero.
struct ScheduleEntry {
  double step_size = 0.0;
  double friction = 0.0;
  std::uint64_t noise_law = 0;
};

bool validate_schedule_symmetry(std::span<const ScheduleEntry> schedule);

// Accumulates the transition log-ratios of N stochastic steps so the exact
// potential is evaluated only at the endpoints: the intermediate Boltzmann
// factors telescope away and only the per-step quarter-kinetic differences
// survive.
struct MultiStepAccumulator {
  PhaseState start_state;
  int steps_taken = 0;
  int planned_steps = 0;
  double log_alpha_sum = 0.0;            // running sum of -(K(m_{3/4}) - K(m_{1/4})) / T
  double kinetic_quarter_sum = 0.0;
  double kinetic_three_quarter_sum = 0.0;
  bool forced_rejection = false;
  std::vector<ScheduleEntry> schedule;
  std::vector<std::pair<Vector, Vector>> pre_drawn_noises;  // optional zeta sequence
};

MultiStepAccumulator multi_step_begin(const PhaseState& state, int planned_steps,
                                      std::vector<ScheduleEntry> schedule, bool pre_draw = false,
                                      NoiseStream* stream = nullptr, std::size_t dim = 0);

void multi_step_record(MultiStepAccumulator& acc, const StepTrace& trace,
                       const SamplerConfig& config);

// Closes the round: checks schedule symmetry (failure forces log_alpha to
// -inf), evaluates the exact potential at both endpoints, and returns the
// deferred acceptance record. potential_start_hint skips the re-evaluation of
// U at the stored start position when the caller already knows it.
AcceptanceRecord multi_step_finalize(const MultiStepAccumulator& acc, const TargetModel& target,
                                     const PhaseState& final_state, double temperature,
                                     std::optional<double> potential_start_hint = std::nullopt);

}  // namespace ulmc
