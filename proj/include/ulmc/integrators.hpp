#pragma once

#include <optional>
#include <span>
#include <string>

#include "ulmc/core.hpp"
#include "ulmc/target.hpp"

namespace ulmc {

enum class IntegratorKind { euler_maruyama, obabo, leapfrog, sgld };

std::string to_string(IntegratorKind kind);
std::optional<IntegratorKind> parse_integrator(std::string_view name);

// Everything needed to recompute the acceptance ratio of one splitting step
// and to replay the step exactly: the intermediate momenta of
// O.1 / B.1 / A / B.2 / O.2, the two standard-normal draws, and the gradients
// used by the half kicks. Noise vectors are empty when friction == 0 (the
// O stages are identities and consume nothing).
struct StepTrace {
  Vector momentum_quarter;         // after O.1
  Vector momentum_half;            // after B.1
  Vector momentum_three_quarter;   // after B.2
  Vector noise_first;
  Vector noise_second;
  Vector gradient_start;           // used by B.1, evaluated at the starting position
  Vector gradient_end;             // used by B.2, evaluated at the new position
};

struct StepResult {
  PhaseState state;
  StepTrace trace;
  bool finite = true;  // false: forced rejection, trace filled up to the failing stage
};

// How the half-kick gradients are obtained. A cached starting gradient skips
// one evaluation when the caller already knows grad(U)(position).
struct GradientSource {
  const TargetModel* target = nullptr;
  std::span<const std::int64_t> batch;     // empty: exact full-data gradient
  const Vector* cached_start = nullptr;

  Vector at(std::span<const double> position) const;
  Vector start(std::span<const double> position) const;
};

// One step of the first-order discretization
//   m' = (1 - h*gamma) m - h g + sqrt(h) M^{1/2} sqrt(2 gamma T) eps
//   theta' = theta + h M^{-1} m'
// (momentum first, then position). With gamma = 0 this is the symplectic
// Euler method; the noise term vanishes and eps is ignored.
PhaseState step_euler_maruyama(const PhaseState& state, std::span<const double> gradient,
                               const SamplerConfig& config, std::span<const double> noise);

// One O.1/B.1/A/B.2/O.2 splitting step. With friction == 0 the O stages are
// skipped entirely and the result is bit-identical to step_leapfrog.
StepResult step_obabo(const PhaseState& state, const SamplerConfig& config,
                      const GradientSource& gradient, std::span<const double> noise_first,
                      std::span<const double> noise_second);

// The inner B.1/A/B.2 step alone; local energy error O(h^3), time reversible.
StepResult step_leapfrog(const PhaseState& state, const SamplerConfig& config,
                         const GradientSource& gradient);

// Infinite-friction limit: momentum is not represented. Draws a fresh
// momentum sqrt(T) M^{1/2} eps internally and folds the half kick and drift
// into one position update.
Vector step_sgld(std::span<const double> position, const SamplerConfig& config,
                 const GradientSource& gradient, std::span<const double> noise);

// Re-executes a recorded step with the stored noises and gradients. Uses the
// same arithmetic as step_obabo, so the result is bit-for-bit identical.
PhaseState replay_obabo(const PhaseState& state, const StepTrace& trace,
                        const SamplerConfig& config);

// Whether the reversed move (negated momenta) lies in the support of the
// Euler-Maruyama kernel: both position conditions
//   theta' = theta + h M^{-1} m'   and   theta = theta' - h M^{-1} m
// must hold within 1e-12 relative, which forces m == m'.
bool check_backward_realizability_em(const PhaseState& start, const PhaseState& end,
                                     const SamplerConfig& config);

}  // namespace ulmc
