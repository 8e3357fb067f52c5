#include "ulmc/chain.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ulmc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 64-bit FNV-1a over the batch indices; identifies a realized batch as a
// noise law for the schedule-symmetry check.
std::uint64_t batch_fingerprint(std::span<const std::int64_t> batch) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (std::int64_t idx : batch) {
    auto u = static_cast<std::uint64_t>(idx);
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (u >> (8 * byte)) & 0xFFu;
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

}  // namespace

std::string to_string(Correction c) {
  switch (c) {
    case Correction::none: return "none";
    case Correction::per_step: return "per_step";
    case Correction::multi_step: return "multi_step";
  }
  return "unknown";
}

std::optional<Correction> parse_correction(std::string_view name) {
  if (name == "none") return Correction::none;
  if (name == "per_step" || name == "per-step") return Correction::per_step;
  if (name == "multi_step" || name == "multi-step") return Correction::multi_step;
  return std::nullopt;
}

Chain::Chain(TargetModel target, SamplerConfig config, ChainOptions options,
             Vector initial_position)
    : target_(std::move(target)),
      config_(std::move(config)),
      options_(options),
      stream_(options.seed, options.chain_id) {
  const std::size_t d = target_.dim;
  if (initial_position.empty()) initial_position.assign(d, 0.0);
  if (initial_position.size() != d) throw dimension_error("Chain: initial position dimension");
  config_.validate(d);
  if (!all_finite(initial_position)) {
    throw std::invalid_argument("Chain: initial position must be finite");
  }

  if (options_.correction != Correction::none &&
      (options_.integrator == IntegratorKind::euler_maruyama ||
       options_.integrator == IntegratorKind::sgld)) {
    throw std::invalid_argument(
        "Metropolis correction requires the obabo or leapfrog integrator. The " +
        to_string(options_.integrator) +
        " update can never realize the reversed move, so its acceptance probability is "
        "identically zero; see the theorem1-demo subcommand for a demonstration.");
  }
  if (options_.correction == Correction::multi_step && options_.multi_step_n < 1) {
    throw std::invalid_argument("Chain: multi_step_n must be >= 1");
  }
  if (options_.sample_stride < 1) {
    throw std::invalid_argument("Chain: sample_stride must be >= 1");
  }
  if (options_.use_minibatch) {
    if (options_.batch_size < 1 || target_.data_size % options_.batch_size != 0) {
      throw std::invalid_argument("Chain: batch_size must divide the target's data size");
    }
    schedule_.emplace(target_.data_size, options_.batch_size, options_.seed + options_.chain_id);
  }

  state_.position = std::move(initial_position);
  if (options_.integrator == IntegratorKind::sgld) {
    state_.momentum.assign(d, 0.0);  // never used; the sgld update carries no momentum
  } else {
    const Vector noise = stream_.normal_vector(d);
    state_.momentum = config_.mass.sqrt_apply(noise);
    const double sqrt_temp = std::sqrt(config_.temperature);
    for (double& m : state_.momentum) m *= sqrt_temp;
  }
}

void Chain::record_sample(std::int64_t step, double log_alpha, bool accepted) {
  if (options_.sample_stride > 1 && step % options_.sample_stride != 0) return;
  SampleRow row;
  row.step = step;
  row.position = state_.position;
  row.momentum = state_.momentum;
  if (options_.integrator == IntegratorKind::sgld) {
    row.kinetic = kNaN;
  } else {
    row.kinetic = kinetic_energy(state_.momentum, config_.mass);
  }
  if (cached_potential_) {
    row.potential = *cached_potential_;
  } else {
    row.potential = target_.potential(state_.position);
    cached_potential_ = row.potential;
  }
  row.log_alpha = log_alpha;
  row.accepted = accepted;
  samples_.push_back(std::move(row));
}

StepResult Chain::integrator_step(const GradientSource& gradient) {
  if (options_.integrator == IntegratorKind::leapfrog) {
    return step_leapfrog(state_, config_, gradient);
  }
  if (config_.friction > 0.0) {
    const Vector eps1 = stream_.normal_vector(state_.dim());
    const Vector eps2 = stream_.normal_vector(state_.dim());
    return step_obabo(state_, config_, gradient, eps1, eps2);
  }
  return step_obabo(state_, config_, gradient, {}, {});
}

bool Chain::advance() {
  if (failed_) return false;
  switch (options_.integrator) {
    case IntegratorKind::euler_maruyama: return advance_euler_maruyama();
    case IntegratorKind::sgld: return advance_sgld();
    case IntegratorKind::obabo:
    case IntegratorKind::leapfrog:
      return options_.correction == Correction::multi_step ? advance_multi_step()
                                                           : advance_single_step();
  }
  return false;
}

void Chain::run(std::int64_t outer_steps) {
  for (std::int64_t i = 0; i < outer_steps; ++i) {
    if (!advance()) break;
  }
}

bool Chain::advance_euler_maruyama() {
  Vector gradient;
  if (options_.use_minibatch) {
    const auto batch = schedule_->next_batch();
    gradient = target_.minibatch_grad(state_.position, batch);
  } else {
    gradient = cached_gradient_ ? *cached_gradient_ : target_.grad(state_.position);
  }
  if (!all_finite(gradient)) {
    failed_ = true;
    return false;
  }
  Vector noise;
  if (config_.friction > 0.0) noise = stream_.normal_vector(state_.dim());
  PhaseState next = step_euler_maruyama(state_, gradient, config_, noise);
  if (!is_finite(next)) {
    failed_ = true;
    return false;
  }
  state_ = std::move(next);
  cached_potential_.reset();
  cached_gradient_.reset();
  outer_step_ += 1;
  record_sample(outer_step_, kNaN, true);
  return true;
}

bool Chain::advance_sgld() {
  GradientSource gradient;
  gradient.target = &target_;
  std::vector<std::int64_t> batch;
  if (options_.use_minibatch) {
    batch = schedule_->next_batch();
    gradient.batch = batch;
  }
  const Vector noise = stream_.normal_vector(state_.dim());
  Vector next = step_sgld(state_.position, config_, gradient, noise);
  if (!all_finite(next)) {
    failed_ = true;
    return false;
  }
  state_.position = std::move(next);
  cached_potential_.reset();
  cached_gradient_.reset();
  outer_step_ += 1;
  record_sample(outer_step_, kNaN, true);
  return true;
}

bool Chain::advance_single_step() {
  const std::size_t d = state_.dim();

  // Leapfrog is the inner step of the momentum-resampling sampler: draw a
  // fresh momentum before every step.
  if (options_.integrator == IntegratorKind::leapfrog) {
    const Vector noise = stream_.normal_vector(d);
    state_.momentum = config_.mass.sqrt_apply(noise);
    const double sqrt_temp = std::sqrt(config_.temperature);
    for (double& m : state_.momentum) m *= sqrt_temp;
  }

  GradientSource gradient;
  gradient.target = &target_;
  std::vector<std::int64_t> batch;
  if (options_.use_minibatch) {
    batch = schedule_->next_batch();
    gradient.batch = batch;
  } else if (cached_gradient_) {
    gradient.cached_start = &*cached_gradient_;
  }

  StepResult result = integrator_step(gradient);
  outer_step_ += 1;

  if (options_.correction == Correction::none) {
    if (!result.finite || !is_finite(result.state)) {
      failed_ = true;
      return false;
    }
    state_ = std::move(result.state);
    cached_potential_.reset();
    if (!options_.use_minibatch) {
      cached_gradient_ = result.trace.gradient_end;
    }
    record_sample(outer_step_, kNaN, true);
    return true;
  }

  // Per-step correction against the exact potential.
  const double potential_start =
      cached_potential_ ? *cached_potential_ : target_.potential(state_.position);
  double potential_end = kNaN;
  double log_alpha = kNegInf;
  bool forced = !result.finite;
  if (!forced) {
    potential_end = target_.potential(result.state.position);
    log_alpha = ggmc_log_accept(result.trace, potential_start, potential_end, config_);
    forced = !std::isfinite(potential_end);
  }

  EnergyBreakdown energies;
  energies.potential_start = potential_start;
  energies.potential_end = potential_end;
  if (!result.trace.momentum_quarter.empty() && all_finite(result.trace.momentum_quarter)) {
    energies.kinetic_quarter = kinetic_energy(result.trace.momentum_quarter, config_.mass);
  }
  if (!result.trace.momentum_three_quarter.empty() &&
      all_finite(result.trace.momentum_three_quarter)) {
    energies.kinetic_three_quarter =
        kinetic_energy(result.trace.momentum_three_quarter, config_.mass);
  }

  const double u = stream_.uniform01();
  auto [next_state, record] = accept_reject(state_, result.state, log_alpha, u, energies);
  record.forced_rejection = forced;

  state_ = std::move(next_state);
  if (record.accepted) {
    cached_potential_ = potential_end;
    if (!options_.use_minibatch) cached_gradient_ = result.trace.gradient_end;
  } else {
    cached_potential_ = potential_start;
    // The retained position is unchanged, so a cached exact gradient stays valid.
  }
  records_.push_back(record);
  record_sample(outer_step_, record.log_alpha, record.accepted);
  return true;
}

std::vector<std::int64_t> Chain::palindromic_batches(
    int n_steps, std::vector<std::vector<std::int64_t>>& out) {
  // Mirror fresh batches around the midpoint so the realized batch sequence
  // equals its own reversal; odd lengths use the middle batch once.
  const int half = (n_steps + 1) / 2;
  std::vector<std::vector<std::int64_t>> fresh;
  fresh.reserve(half);
  for (int i = 0; i < half; ++i) fresh.push_back(schedule_->next_batch());
  out.clear();
  out.reserve(n_steps);
  std::vector<std::int64_t> laws(n_steps);
  for (int i = 0; i < n_steps; ++i) {
    const int source = i < half ? i : n_steps - 1 - i;
    out.push_back(fresh[source]);
    laws[i] = static_cast<std::int64_t>(batch_fingerprint(fresh[source]));
  }
  return laws;
}

bool Chain::advance_multi_step() {
  const std::size_t d = state_.dim();
  const int n_steps = options_.multi_step_n;

  const bool resample = options_.resample_momentum_between_rounds ||
                        options_.integrator == IntegratorKind::leapfrog;
  if (resample) {
    const Vector noise = stream_.normal_vector(d);
    state_.momentum = config_.mass.sqrt_apply(noise);
    const double sqrt_temp = std::sqrt(config_.temperature);
    for (double& m : state_.momentum) m *= sqrt_temp;
  }

  std::vector<std::vector<std::int64_t>> batches;
  std::vector<ScheduleEntry> schedule(static_cast<std::size_t>(n_steps));
  for (auto& entry : schedule) {
    entry.step_size = config_.step_size;
    entry.friction = options_.integrator == IntegratorKind::leapfrog ? 0.0 : config_.friction;
  }
  if (options_.use_minibatch) {
    std::vector<std::int64_t> laws = palindromic_batches(n_steps, batches);
    for (int i = 0; i < n_steps; ++i) {
      schedule[static_cast<std::size_t>(i)].noise_law = static_cast<std::uint64_t>(laws[i]);
    }
  }

  const double potential_start =
      cached_potential_ ? *cached_potential_ : target_.potential(state_.position);
  const PhaseState round_start = state_;

  MultiStepAccumulator acc = multi_step_begin(round_start, n_steps, std::move(schedule),
                                              options_.pre_draw_noise, &stream_, d);

  PhaseState current = round_start;
  for (int i = 0; i < n_steps; ++i) {
    GradientSource gradient;
    gradient.target = &target_;
    if (options_.use_minibatch) gradient.batch = batches[static_cast<std::size_t>(i)];

    StepResult result;
    if (options_.integrator == IntegratorKind::leapfrog) {
      result = step_leapfrog(current, config_, gradient);
    } else if (config_.friction > 0.0) {
      if (options_.pre_draw_noise) {
        const auto& [eps1, eps2] = acc.pre_drawn_noises[static_cast<std::size_t>(i)];
        result = step_obabo(current, config_, gradient, eps1, eps2);
      } else {
        const Vector eps1 = stream_.normal_vector(d);
        const Vector eps2 = stream_.normal_vector(d);
        result = step_obabo(current, config_, gradient, eps1, eps2);
      }
    } else {
      result = step_obabo(current, config_, gradient, {}, {});
    }

    if (!result.finite) {
      acc.forced_rejection = true;
      break;
    }
    multi_step_record(acc, result.trace, config_);
    current = std::move(result.state);
  }

  AcceptanceRecord finalized =
      multi_step_finalize(acc, target_, current, config_.temperature, potential_start);

  EnergyBreakdown energies;
  energies.potential_start = finalized.potential_start;
  energies.potential_end = finalized.potential_end;
  energies.kinetic_quarter = finalized.kinetic_quarter;
  energies.kinetic_three_quarter = finalized.kinetic_three_quarter;

  const double u = stream_.uniform01();
  auto [next_state, record] = accept_reject(state_, current, finalized.log_alpha, u, energies);
  record.forced_rejection = finalized.forced_rejection;
  record.schedule_asymmetric = finalized.schedule_asymmetric;

  state_ = std::move(next_state);
  outer_step_ += 1;
  if (record.accepted) {
    cached_potential_ = finalized.potential_end;
    cached_gradient_.reset();  // gradient_end came from a minibatch in stochastic rounds
  } else {
    cached_potential_ = potential_start;
  }
  records_.push_back(record);
  record_sample(outer_step_, record.log_alpha, record.accepted);
  return true;
}

ChainSummary Chain::summary() const {
  const std::size_t n = samples_.size();
  const std::size_t d = target_.dim;
  std::vector<double> flat(n * d);
  std::vector<double> potentials(n);
  std::vector<double> kinetics(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) flat[i * d + j] = samples_[i].position[j];
    potentials[i] = samples_[i].potential;
    kinetics[i] = samples_[i].kinetic;
  }
  return summarize(flat, d, potentials, kinetics, records_);
}

}  // namespace ulmc
