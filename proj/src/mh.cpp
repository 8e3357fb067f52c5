#include "ulmc/mh.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ulmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double ggmc_log_accept(const StepTrace& trace, double potential_start, double potential_end,
                       const SamplerConfig& config) {
  if (!std::isfinite(potential_start) || !std::isfinite(potential_end) ||
      !all_finite(trace.momentum_quarter) || !all_finite(trace.momentum_three_quarter)) {
    return kNegInf;
  }
  const double k_quarter = kinetic_energy(trace.momentum_quarter, config.mass);
  const double k_three_quarter = kinetic_energy(trace.momentum_three_quarter, config.mass);
  return -(potential_end - potential_start + k_three_quarter - k_quarter) / config.temperature;
}

double oracle_log_accept(const PhaseState& start, const PhaseState& end, const StepTrace& trace,
                         const TargetModel& target, const SamplerConfig& config,
                         bool normalized_densities, bool* degenerate) {
  const std::size_t d = start.dim();
  config.validate(d);
  if (degenerate != nullptr) *degenerate = false;

  const double temperature = config.temperature;
  const double potential_start = target.potential(start.position);
  const double potential_end = target.potential(end.position);
  if (!std::isfinite(potential_start) || !std::isfinite(potential_end)) return kNegInf;

  // Joint-density log ratio of the endpoint states.
  const double boltzmann_ratio =
      -(potential_end - potential_start + kinetic_energy(end.momentum, config.mass) -
        kinetic_energy(start.momentum, config.mass)) /
      temperature;

  const double one_minus_retain = -std::expm1(-config.friction * config.step_size);
  if (one_minus_retain <= 0.0) {
    // Zero friction: the refresh stages are identities and the increment
    // densities degenerate. The inner step is time reversible, so the
    // transition ratio is one and only the joint-density ratio survives.
    if (degenerate != nullptr) *degenerate = true;
    return boltzmann_ratio;
  }

  const double sqrt_retain = std::exp(-0.5 * config.friction * config.step_size);
  const double covariance_scale = one_minus_retain * temperature;  // covariance (1-a) T M

  // Log density of one refresh increment v ~ N(0, (1-a) T M). The
  // normalization constant is shared by all four evaluations and cancels in
  // the ratio; it is included on request to show exactly that.
  double log_normalizer = 0.0;
  if (normalized_densities) {
    double log_det_mass = 0.0;
    for (double m : config.mass.diagonal()) log_det_mass += std::log(m);
    log_normalizer = -0.5 * (static_cast<double>(d) *
                                 std::log(2.0 * 3.141592653589793238462643383279 *
                                          covariance_scale) +
                             log_det_mass);
  }
  const auto increment_log_density = [&](const Vector& v) {
    return -kinetic_energy(v, config.mass) / covariance_scale + log_normalizer;
  };
  // Constant position Jacobian of the transition map, log(h^{-1} det M);
  // present in both directions, so it cancels as well.
  double log_jacobian = 0.0;
  if (normalized_densities) {
    double log_det_mass = 0.0;
    for (double m : config.mass.diagonal()) log_det_mass += std::log(m);
    log_jacobian = log_det_mass - std::log(config.step_size);
  }

  Vector forward_first(d), forward_second(d), backward_first(d), backward_second(d);
  for (std::size_t i = 0; i < d; ++i) {
    forward_first[i] = trace.momentum_quarter[i] - sqrt_retain * start.momentum[i];
    forward_second[i] = end.momentum[i] - sqrt_retain * trace.momentum_three_quarter[i];
    backward_first[i] = -trace.momentum_three_quarter[i] + sqrt_retain * end.momentum[i];
    backward_second[i] = -start.momentum[i] + sqrt_retain * trace.momentum_quarter[i];
  }

  const double forward_log = log_jacobian + increment_log_density(forward_first) +
                             increment_log_density(forward_second);
  const double backward_log = log_jacobian + increment_log_density(backward_first) +
                              increment_log_density(backward_second);

  return boltzmann_ratio + (backward_log - forward_log);
}

double em_log_accept(const PhaseState& start, const PhaseState& end, const TargetModel& target,
                     const SamplerConfig& config) {
  if (!check_backward_realizability_em(start, end, config)) return kNegInf;

  const double gamma = config.friction;
  const double h = config.step_size;
  const double noise_variance_scale = 2.0 * gamma * config.temperature * h;
  if (noise_variance_scale <= 0.0) return kNegInf;  // deterministic kernel, no density

  // The measure-zero realizable case: evaluate the Gaussian momentum-update
  // densities directly. Position factors are delta terms shared by both
  // directions.
  const double potential_start = target.potential(start.position);
  const double potential_end = target.potential(end.position);
  if (!std::isfinite(potential_start) || !std::isfinite(potential_end)) return kNegInf;

  const Vector grad_start = target.grad(start.position);
  const Vector grad_end = target.grad(end.position);
  const Vector& diag = config.mass.diagonal();

  double forward_exponent = 0.0;
  double backward_exponent = 0.0;
  for (std::size_t i = 0; i < start.dim(); ++i) {
    const double fwd = end.momentum[i] -
                       ((1.0 - h * gamma) * start.momentum[i] - h * grad_start[i]);
    const double bwd = -start.momentum[i] -
                       ((1.0 - h * gamma) * (-end.momentum[i]) - h * grad_end[i]);
    forward_exponent += fwd * fwd / diag[i];
    backward_exponent += bwd * bwd / diag[i];
  }
  const double transition_ratio =
      -(backward_exponent - forward_exponent) / (2.0 * noise_variance_scale);

  const double boltzmann_ratio =
      -(potential_end - potential_start + kinetic_energy(end.momentum, config.mass) -
        kinetic_energy(start.momentum, config.mass)) /
      config.temperature;
  return boltzmann_ratio + transition_ratio;
}

std::pair<PhaseState, AcceptanceRecord> accept_reject(const PhaseState& current,
                                                      const PhaseState& proposal,
                                                      double log_alpha, double uniform_draw,
                                                      const EnergyBreakdown& energies) {
  if (!(uniform_draw > 0.0 && uniform_draw < 1.0)) {
    throw std::invalid_argument("accept_reject: uniform draw must lie in (0,1)");
  }
  AcceptanceRecord record;
  record.log_alpha = log_alpha;
  record.potential_start = energies.potential_start;
  record.potential_end = energies.potential_end;
  record.kinetic_quarter = energies.kinetic_quarter;
  record.kinetic_three_quarter = energies.kinetic_three_quarter;

  record.accepted = std::log(uniform_draw) < log_alpha;
  if (record.accepted) return {proposal, record};
  return {negate_momentum(current), record};
}

bool validate_schedule_symmetry(std::span<const ScheduleEntry> schedule) {
  const std::size_t n = schedule.size();
  for (std::size_t i = 0; i < n / 2 + n % 2; ++i) {
    const ScheduleEntry& a = schedule[i];
    const ScheduleEntry& b = schedule[n - 1 - i];
    if (a.step_size != b.step_size || a.friction != b.friction || a.noise_law != b.noise_law) {
      return false;
    }
  }
  return true;
}

MultiStepAccumulator multi_step_begin(const PhaseState& state, int planned_steps,
                                      std::vector<ScheduleEntry> schedule, bool pre_draw,
                                      NoiseStream* stream, std::size_t dim) {
  if (planned_steps < 1) throw std::invalid_argument("multi_step_begin: need at least one step");
  if (!schedule.empty() && schedule.size() != static_cast<std::size_t>(planned_steps)) {
    throw std::invalid_argument("multi_step_begin: schedule length mismatch");
  }
  MultiStepAccumulator acc;
  acc.start_state = state;
  acc.planned_steps = planned_steps;
  acc.schedule = std::move(schedule);
  if (pre_draw) {
    if (stream == nullptr || dim == 0) {
      throw std::invalid_argument("multi_step_begin: pre-draw needs a stream and dimension");
    }
    acc.pre_drawn_noises.reserve(static_cast<std::size_t>(planned_steps));
    for (int i = 0; i < planned_steps; ++i) {
      // Draw sequentially; argument evaluation order would be unspecified.
      Vector first = stream->normal_vector(dim);
      Vector second = stream->normal_vector(dim);
      acc.pre_drawn_noises.emplace_back(std::move(first), std::move(second));
    }
  }
  return acc;
}

void multi_step_record(MultiStepAccumulator& acc, const StepTrace& trace,
                       const SamplerConfig& config) {
  if (acc.steps_taken >= acc.planned_steps) {
    throw std::logic_error("multi_step_record: more steps than planned");
  }
  if (!all_finite(trace.momentum_quarter) || !all_finite(trace.momentum_three_quarter)) {
    acc.forced_rejection = true;
    acc.steps_taken += 1;
    return;
  }
  const double k_quarter = kinetic_energy(trace.momentum_quarter, config.mass);
  const double k_three_quarter = kinetic_energy(trace.momentum_three_quarter, config.mass);
  acc.kinetic_quarter_sum += k_quarter;
  acc.kinetic_three_quarter_sum += k_three_quarter;
  acc.log_alpha_sum += -(k_three_quarter - k_quarter) / config.temperature;
  acc.steps_taken += 1;
}

AcceptanceRecord multi_step_finalize(const MultiStepAccumulator& acc, const TargetModel& target,
                                     const PhaseState& final_state, double temperature,
                                     std::optional<double> potential_start_hint) {
  if (!(temperature > 0.0)) throw std::invalid_argument("multi_step_finalize: temperature");
  AcceptanceRecord record;
  record.kinetic_quarter = acc.kinetic_quarter_sum;
  record.kinetic_three_quarter = acc.kinetic_three_quarter_sum;

  if (!acc.schedule.empty() && !validate_schedule_symmetry(acc.schedule)) {
    record.schedule_asymmetric = true;
    record.log_alpha = kNegInf;
    return record;
  }
  if (acc.forced_rejection || !is_finite(final_state)) {
    record.forced_rejection = true;
    record.log_alpha = kNegInf;
    return record;
  }

  const double potential_start =
      potential_start_hint ? *potential_start_hint : target.potential(acc.start_state.position);
  const double potential_end = target.potential(final_state.position);
  record.potential_start = potential_start;
  record.potential_end = potential_end;
  if (!std::isfinite(potential_start) || !std::isfinite(potential_end)) {
    record.forced_rejection = true;
    record.log_alpha = kNegInf;
    return record;
  }

  // The intermediate joint-density factors telescope: only the endpoint
  // potentials and the accumulated quarter-kinetic differences remain. The
  // endpoint kinetic terms cancel against the transition product exactly.
  record.log_alpha = -(potential_end - potential_start) / temperature + acc.log_alpha_sum;
  return record;
}

}  // namespace ulmc
