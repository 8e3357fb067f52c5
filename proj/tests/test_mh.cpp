#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "ulmc/mh.hpp"
#include "ulmc/rng.hpp"

using namespace ulmc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SamplerConfig make_config(std::size_t d, double step, double friction, double temperature = 1.0) {
  SamplerConfig config;
  config.step_size = step;
  config.friction = friction;
  config.temperature = temperature;
  config.mass = MassMatrix::identity(d);
  return config;
}

GradientSource exact_gradient(const TargetModel& target) {
  GradientSource g;
  g.target = &target;
  return g;
}

struct RandomStep {
  TargetModel target;
  SamplerConfig config;
  PhaseState start;
  PhaseState end;
  StepTrace trace;
};

// One random splitting step on a random Gaussian target; the raw material for
// the acceptance-formula comparisons.
RandomStep random_step(NoiseStream& stream, std::size_t d, double step, double friction,
                       double temperature) {
  Vector mean(d), variance(d), mass_diag(d);
  for (std::size_t i = 0; i < d; ++i) {
    mean[i] = stream.normal();
    variance[i] = 0.3 + 2.0 * stream.uniform01();
    mass_diag[i] = 0.3 + 2.5 * stream.uniform01();
  }
  RandomStep out{make_gaussian(mean, variance), SamplerConfig{}, {}, {}, {}};
  out.config.step_size = step;
  out.config.friction = friction;
  out.config.temperature = temperature;
  out.config.mass = MassMatrix{mass_diag};

  out.start.position = stream.normal_vector(d);
  out.start.momentum = stream.normal_vector(d);
  const StepResult result =
      friction > 0.0
          ? step_obabo(out.start, out.config, exact_gradient(out.target),
                       stream.normal_vector(d), stream.normal_vector(d))
          : step_obabo(out.start, out.config, exact_gradient(out.target), {}, {});
  out.end = result.state;
  out.trace = result.trace;
  return out;
}

}  // namespace

TEST_CASE("ggmc log acceptance is zero for an energy-conserving step") {
  // Free particle: the kicks vanish, so the quarter momenta agree and the
  // potential is flat.
  StepTrace trace;
  trace.momentum_quarter = Vector{0.7, -0.2};
  trace.momentum_three_quarter = Vector{0.7, -0.2};
  auto config = make_config(2, 0.1, 1.0);
  CHECK(ggmc_log_accept(trace, 0.0, 0.0, config) == 0.0);
}

TEST_CASE("ggmc log acceptance halves when the temperature doubles") {
  NoiseStream stream(101, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto step = random_step(stream, 2, 0.3, 1.2, 1.0);
    const double u_start = step.target.potential(step.start.position);
    const double u_end = step.target.potential(step.end.position);
    const double cold = ggmc_log_accept(step.trace, u_start, u_end, step.config);
    SamplerConfig warm_config = step.config;
    warm_config.temperature = 2.0;
    const double warm = ggmc_log_accept(step.trace, u_start, u_end, warm_config);
    CHECK(warm == doctest::Approx(0.5 * cold).epsilon(1e-14));
  }
}

TEST_CASE("ggmc log acceptance does not depend on the friction") {
  NoiseStream stream(103, 0);
  const auto step = random_step(stream, 3, 0.2, 0.8, 1.0);
  const double u_start = step.target.potential(step.start.position);
  const double u_end = step.target.potential(step.end.position);
  const double base = ggmc_log_accept(step.trace, u_start, u_end, step.config);
  for (double friction : {0.0, 0.5, 3.0, 50.0}) {
    SamplerConfig other = step.config;
    other.friction = friction;
    CHECK(ggmc_log_accept(step.trace, u_start, u_end, other) == base);
  }
}

TEST_CASE("ggmc log acceptance forces rejection on non-finite input") {
  StepTrace trace;
  trace.momentum_quarter = Vector{0.1};
  trace.momentum_three_quarter = Vector{0.2};
  auto config = make_config(1, 0.1, 1.0);
  CHECK(ggmc_log_accept(trace, 0.0, kInf, config) == -kInf);
  CHECK(ggmc_log_accept(trace, std::nan(""), 0.0, config) == -kInf);
  trace.momentum_three_quarter[0] = std::nan("");
  CHECK(ggmc_log_accept(trace, 0.0, 0.0, config) == -kInf);
}

TEST_CASE("acceptance formula agrees with the first-principles density-ratio oracle") {
  NoiseStream stream(107, 0);
  const std::size_t dims[] = {1, 2, 5};
  const double temperatures[] = {0.5, 1.0, 2.0};
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = dims[stream.uniform_below(3)];
    const double h = 0.01 + 0.99 * stream.uniform01();
    const double friction = 0.01 + 9.99 * stream.uniform01();
    const double temperature = temperatures[stream.uniform_below(3)];
    const auto step = random_step(stream, d, h, friction, temperature);

    const double u_start = step.target.potential(step.start.position);
    const double u_end = step.target.potential(step.end.position);
    const double simplified = ggmc_log_accept(step.trace, u_start, u_end, step.config);
    bool degenerate = true;
    const double from_densities =
        oracle_log_accept(step.start, step.end, step.trace, step.target, step.config,
                          /*normalized_densities=*/true, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK(std::abs(simplified - from_densities) < 1e-10);
  }
}

TEST_CASE("density-ratio oracle: normalized and unnormalized Gaussians give the same ratio") {
  NoiseStream stream(109, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto step = random_step(stream, 2, 0.4, 1.5, 1.0);
    const double with_constants =
        oracle_log_accept(step.start, step.end, step.trace, step.target, step.config, true);
    const double without_constants =
        oracle_log_accept(step.start, step.end, step.trace, step.target, step.config, false);
    CHECK(with_constants ==
          doctest::Approx(without_constants).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("density-ratio oracle: transition part vanishes when the momenta are symmetric") {
  // With m' = m and m_{3/4} = m_{1/4}, all four increment kinetic energies
  // coincide, so only the Boltzmann ratio survives; with equal potentials and
  // kinetic energies that ratio is zero too.
  const std::size_t d = 2;
  auto config = make_config(d, 0.2, 1.0);
  const TargetModel target = make_gaussian(Vector{0.0, 0.0}, Vector{1.0, 1.0});

  PhaseState start{Vector{0.3, -0.4}, Vector{0.5, 0.2}};
  PhaseState end{start.position, start.momentum};
  StepTrace trace;
  trace.momentum_quarter = Vector{0.9, -0.1};
  trace.momentum_three_quarter = trace.momentum_quarter;
  const double value = oracle_log_accept(start, end, trace, target, config);
  CHECK(value == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("density-ratio oracle falls back to the reversible-step limit at zero friction") {
  NoiseStream stream(113, 0);
  const auto step = random_step(stream, 2, 0.3, 0.0, 1.0);
  const double u_start = step.target.potential(step.start.position);
  const double u_end = step.target.potential(step.end.position);
  bool degenerate = false;
  const double value = oracle_log_accept(step.start, step.end, step.trace, step.target,
                                         step.config, true, &degenerate);
  CHECK(degenerate);
  CHECK(value ==
        doctest::Approx(ggmc_log_accept(step.trace, u_start, u_end, step.config)).epsilon(1e-12));
}

TEST_CASE("euler-maruyama log acceptance is minus infinity on genuine steps") {
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  auto config = make_config(1, 0.1, 0.5);
  NoiseStream stream(127, 0);
  PhaseState state{Vector{0.2}, Vector{-0.3}};
  for (int rep = 0; rep < 10000; ++rep) {
    const PhaseState next = step_euler_maruyama(state, target.grad(state.position), config,
                                                stream.normal_vector(1));
    CHECK(em_log_accept(state, next, target, config) == -kInf);
    state = next;
  }
}

TEST_CASE("euler-maruyama log acceptance stays minus infinity as the step shrinks") {
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  NoiseStream stream(131, 0);
  for (double h : {0.1, 1e-3, 1e-6, 1e-9}) {
    auto config = make_config(1, h, 0.5);
    const PhaseState state{Vector{0.4}, Vector{0.6}};
    const PhaseState next = step_euler_maruyama(state, target.grad(state.position), config,
                                                stream.normal_vector(1));
    CHECK(em_log_accept(state, next, target, config) == -kInf);
  }
}

TEST_CASE("euler-maruyama log acceptance is finite on the measure-zero event") {
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  auto config = make_config(1, 0.25, 0.8);
  const Vector momentum{0.7};
  const Vector start{0.1};
  const Vector end{0.1 + 0.25 * 0.7};
  const double value = em_log_accept(PhaseState{start, momentum}, PhaseState{end, momentum},
                                     target, config);
  CHECK(std::isfinite(value));
}

TEST_CASE("accept_reject: certain acceptance and certain rejection") {
  const PhaseState current{Vector{0.0}, Vector{1.0}};
  const PhaseState proposal{Vector{1.0}, Vector{-2.0}};
  EnergyBreakdown energies;

  NoiseStream stream(137, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const double u = stream.uniform01();
    const auto [accepted_state, accepted_record] =
        accept_reject(current, proposal, 0.0, u, energies);
    CHECK(accepted_record.accepted);
    CHECK(accepted_state.position == proposal.position);
    CHECK(accepted_state.momentum == proposal.momentum);

    const auto [rejected_state, rejected_record] =
        accept_reject(current, proposal, -kInf, u, energies);
    CHECK_FALSE(rejected_record.accepted);
    CHECK(rejected_state.position == current.position);
    // The retained momentum is reversed; a rejected trajectory must back out.
    CHECK(rejected_state.momentum == Vector{-1.0});
  }
}

TEST_CASE("accept_reject: acceptance frequency matches the acceptance probability") {
  const PhaseState current{Vector{0.0}, Vector{0.0}};
  const PhaseState proposal{Vector{1.0}, Vector{0.0}};
  EnergyBreakdown energies;
  const double log_alpha = std::log(0.3);

  NoiseStream stream(139, 0);
  int accepted = 0;
  const int trials = 100000;
  for (int rep = 0; rep < trials; ++rep) {
    const auto [state, record] =
        accept_reject(current, proposal, log_alpha, stream.uniform01(), energies);
    accepted += record.accepted ? 1 : 0;
  }
  CHECK(std::abs(static_cast<double>(accepted) / trials - 0.3) < 0.005);
}

TEST_CASE("acceptance records can recompute their log acceptance from the stored energies") {
  NoiseStream stream(149, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto step = random_step(stream, 2, 0.35, 1.0, 1.3);
    const double u_start = step.target.potential(step.start.position);
    const double u_end = step.target.potential(step.end.position);
    const double log_alpha = ggmc_log_accept(step.trace, u_start, u_end, step.config);
    EnergyBreakdown energies{u_start, u_end,
                             kinetic_energy(step.trace.momentum_quarter, step.config.mass),
                             kinetic_energy(step.trace.momentum_three_quarter, step.config.mass)};
    const auto [state, record] =
        accept_reject(step.start, step.end, log_alpha, stream.uniform01(), energies);
    const double recomputed = -(record.potential_end - record.potential_start +
                                record.kinetic_three_quarter - record.kinetic_quarter) /
                              step.config.temperature;
    CHECK(record.log_alpha == doctest::Approx(recomputed).epsilon(1e-14));
  }
}

TEST_CASE("schedule symmetry: constant and palindromic pass, monotone decay fails") {
  std::vector<ScheduleEntry> constant(6, ScheduleEntry{0.1, 1.0, 0});
  CHECK(validate_schedule_symmetry(constant));

  std::vector<ScheduleEntry> palindrome{{0.1, 1.0, 0}, {0.2, 1.0, 0}, {0.2, 1.0, 0},
                                        {0.1, 1.0, 0}};
  CHECK(validate_schedule_symmetry(palindrome));

  // Cosine-style decay: strictly decreasing step sizes.
  std::vector<ScheduleEntry> cosine;
  const int n = 8;
  for (int i = 0; i < n; ++i) {
    const double phase = static_cast<double>(i) / (n - 1);
    cosine.push_back({0.05 * (1.0 + std::cos(3.14159265358979 * phase)), 1.0, 0});
  }
  CHECK_FALSE(validate_schedule_symmetry(cosine));

  // Palindromic step sizes but mismatched noise laws.
  std::vector<ScheduleEntry> laws{{0.1, 1.0, 1}, {0.1, 1.0, 2}, {0.1, 1.0, 2}, {0.1, 1.0, 3}};
  CHECK_FALSE(validate_schedule_symmetry(laws));
  std::vector<ScheduleEntry> laws_ok{{0.1, 1.0, 1}, {0.1, 1.0, 2}, {0.1, 1.0, 2}, {0.1, 1.0, 1}};
  CHECK(validate_schedule_symmetry(laws_ok));
}

TEST_CASE("multi-step with one exact step reproduces the single-step acceptance") {
  NoiseStream stream(151, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto step = random_step(stream, 2, 0.3, 1.1, 1.0);
    const double u_start = step.target.potential(step.start.position);
    const double u_end = step.target.potential(step.end.position);
    const double single = ggmc_log_accept(step.trace, u_start, u_end, step.config);

    auto acc = multi_step_begin(step.start, 1,
                                {ScheduleEntry{step.config.step_size, step.config.friction, 0}});
    multi_step_record(acc, step.trace, step.config);
    const auto record = multi_step_finalize(acc, step.target, step.end,
                                            step.config.temperature);
    CHECK(record.log_alpha == doctest::Approx(single).epsilon(1e-12));
  }
}

TEST_CASE("multi-step acceptance telescopes to the sum of per-step acceptances") {
  NoiseStream stream(157, 0);
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  for (int rep = 0; rep < 100; ++rep) {
    auto config = make_config(1, 0.1 + 0.4 * stream.uniform01(), 0.3 + 2.0 * stream.uniform01());
    PhaseState state{stream.normal_vector(1), stream.normal_vector(1)};

    const int n_steps = 5;
    auto acc = multi_step_begin(
        state, n_steps,
        std::vector<ScheduleEntry>(n_steps, {config.step_size, config.friction, 0}));

    double per_step_sum = 0.0;
    PhaseState current = state;
    for (int i = 0; i < n_steps; ++i) {
      const StepResult result = step_obabo(current, config, exact_gradient(target),
                                           stream.normal_vector(1), stream.normal_vector(1));
      per_step_sum += ggmc_log_accept(result.trace, target.potential(current.position),
                                      target.potential(result.state.position), config);
      multi_step_record(acc, result.trace, config);
      current = result.state;
    }
    const auto record = multi_step_finalize(acc, target, current, config.temperature);
    CHECK(record.log_alpha == doctest::Approx(per_step_sum).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("multi-step with an asymmetric schedule forces rejection") {
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  auto config = make_config(1, 0.2, 1.0);
  PhaseState state{Vector{0.1}, Vector{0.4}};

  // Cosine-style decreasing step sizes over the round.
  std::vector<ScheduleEntry> schedule;
  for (int i = 0; i < 4; ++i) {
    schedule.push_back({0.2 - 0.03 * i, 1.0, 0});
  }
  auto acc = multi_step_begin(state, 4, schedule);

  NoiseStream stream(163, 0);
  PhaseState current = state;
  for (int i = 0; i < 4; ++i) {
    SamplerConfig step_config = config;
    step_config.step_size = schedule[static_cast<std::size_t>(i)].step_size;
    const StepResult result = step_obabo(current, step_config, exact_gradient(target),
                                         stream.normal_vector(1), stream.normal_vector(1));
    multi_step_record(acc, result.trace, step_config);
    current = result.state;
  }
  const auto record = multi_step_finalize(acc, target, current, config.temperature);
  CHECK(record.schedule_asymmetric);
  CHECK(record.log_alpha == -kInf);
}

TEST_CASE("pre-drawn noise sequences have the planned length and dimension") {
  NoiseStream stream(167, 0);
  const PhaseState state{Vector{0.0, 0.0}, Vector{0.0, 0.0}};
  auto acc = multi_step_begin(state, 3, {}, /*pre_draw=*/true, &stream, 2);
  CHECK(acc.pre_drawn_noises.size() == 3);
  for (const auto& [first, second] : acc.pre_drawn_noises) {
    CHECK(first.size() == 2);
    CHECK(second.size() == 2);
  }
}

TEST_CASE("accept_reject requires a uniform draw strictly inside (0,1)") {
  const PhaseState state{Vector{0.0}, Vector{1.0}};
  EnergyBreakdown energies;
  CHECK_THROWS_AS(accept_reject(state, state, 0.0, 0.0, energies), std::invalid_argument);
  CHECK_THROWS_AS(accept_reject(state, state, 0.0, 1.0, energies), std::invalid_argument);
}
