#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ulmc/core.hpp"
#include "ulmc/rng.hpp"
#include "ulmc/target.hpp"

using namespace ulmc;

TEST_CASE("kinetic energy: zero momentum gives zero") {
  const MassMatrix mass = MassMatrix::identity(3);
  CHECK(kinetic_energy(Vector{0.0, 0.0, 0.0}, mass) == 0.0);
}

TEST_CASE("kinetic energy: hand-computed 1D value") {
  const MassMatrix mass{Vector{4.0}};
  CHECK(kinetic_energy(Vector{2.0}, mass) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("kinetic energy matches a dense quadratic-form oracle") {
  NoiseStream stream(11, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 5;
    Vector diag(d);
    Vector momentum(d);
    for (auto& m : diag) m = 0.5 + stream.uniform01() * 3.0;
    for (auto& m : momentum) m = stream.normal();

    // Dense inverse mass matrix, built explicitly.
    std::vector<oracle::Vec> inverse(d, oracle::Vec(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) inverse[i][i] = 1.0 / diag[i];

    const double expected = oracle::dense_quadratic_form(momentum, inverse);
    const double got = kinetic_energy(momentum, MassMatrix{diag});
    CHECK(got == doctest::Approx(expected).epsilon(1e-14));
    CHECK(got > 0.0);
  }
}

TEST_CASE("kinetic energy rejects mismatched dimensions") {
  const MassMatrix mass = MassMatrix::identity(2);
  CHECK_THROWS_AS(kinetic_energy(Vector{1.0, 2.0, 3.0}, mass), dimension_error);
}

TEST_CASE("mass matrix requires strictly positive entries") {
  CHECK_THROWS_AS(MassMatrix(Vector({1.0, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(MassMatrix(Vector({1.0, -2.0})), std::invalid_argument);
  CHECK_THROWS_AS(MassMatrix(Vector{}), std::invalid_argument);
}

TEST_CASE("mass matrix: sqrt-apply twice equals apply") {
  NoiseStream stream(13, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 1 + static_cast<std::size_t>(stream.uniform_below(6));
    Vector diag(d);
    Vector v(d);
    for (auto& m : diag) m = std::exp(stream.normal());
    for (auto& x : v) x = stream.normal();
    const MassMatrix mass{diag};

    const Vector twice = mass.sqrt_apply(mass.sqrt_apply(v));
    const Vector direct = mass.apply(v);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(twice[i] == doctest::Approx(direct[i]).epsilon(1e-12));
    }
    const Vector inv_twice = mass.inverse_sqrt_apply(mass.inverse_sqrt_apply(v));
    const Vector inv_direct = mass.inverse_apply(v);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(inv_twice[i] == doctest::Approx(inv_direct[i]).epsilon(1e-12));
    }
    // Round trip: inverse of apply.
    const Vector round = mass.inverse_apply(mass.apply(v));
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(round[i] == doctest::Approx(v[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sampler config validation") {
  SamplerConfig config;
  config.mass = MassMatrix::identity(2);
  config.step_size = 0.0;
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config.step_size = 0.1;
  config.friction = -1.0;
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config.friction = 0.0;
  config.temperature = 0.0;
  CHECK_THROWS_AS(config.validate(2), std::invalid_argument);
  config.temperature = 1.0;
  CHECK_NOTHROW(config.validate(2));
  CHECK_THROWS_AS(config.validate(3), dimension_error);
}

namespace {

SamplerConfig unit_config(std::size_t d, double temperature = 1.0) {
  SamplerConfig config;
  config.mass = MassMatrix::identity(d);
  config.temperature = temperature;
  return config;
}

}  // namespace

TEST_CASE("log boltzmann: zero potential and momentum give zero") {
  const TargetModel flat = make_gaussian(Vector{0.0}, Vector{1.0});
  PhaseState state{Vector{0.0}, Vector{0.0}};
  CHECK(log_boltzmann(state, flat, unit_config(1)) == 0.0);
}

TEST_CASE("log boltzmann: standard Gaussian at theta=1, m=1") {
  const TargetModel target = make_gaussian(Vector{0.0}, Vector{1.0});
  PhaseState state{Vector{1.0}, Vector{1.0}};
  CHECK(log_boltzmann(state, target, unit_config(1)) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("log boltzmann: doubling the temperature halves the value") {
  const TargetModel target = make_gaussian(Vector{0.5, -1.0}, Vector{1.0, 2.0});
  NoiseStream stream(17, 0);
  for (int rep = 0; rep < 20; ++rep) {
    PhaseState state{stream.normal_vector(2), stream.normal_vector(2)};
    const double cold = log_boltzmann(state, target, unit_config(2, 1.0));
    const double warm = log_boltzmann(state, target, unit_config(2, 2.0));
    CHECK(warm == doctest::Approx(0.5 * cold).epsilon(1e-14));
  }
}

TEST_CASE("momentum negation is an involution and leaves the energies alone") {
  const TargetModel target = make_gaussian(Vector{0.0, 0.0, 0.0}, Vector{1.0, 2.0, 3.0});
  NoiseStream stream(19, 0);
  for (int rep = 0; rep < 20; ++rep) {
    PhaseState state{stream.normal_vector(3), stream.normal_vector(3)};
    const PhaseState flipped = negate_momentum(state);
    CHECK(flipped.position == state.position);

    const PhaseState twice = negate_momentum(flipped);
    CHECK(twice.position == state.position);
    CHECK(twice.momentum == state.momentum);

    const MassMatrix mass{Vector{1.0, 0.5, 2.0}};
    CHECK(kinetic_energy(flipped.momentum, mass) == kinetic_energy(state.momentum, mass));

    auto config = unit_config(3);
    CHECK(log_boltzmann(flipped, target, config) == log_boltzmann(state, target, config));
  }
}

TEST_CASE("finiteness helpers catch NaN and infinity") {
  CHECK(all_finite(Vector{1.0, 2.0}));
  CHECK_FALSE(all_finite(Vector{1.0, std::nan("")}));
  CHECK_FALSE(all_finite(Vector{1.0, INFINITY}));
  CHECK(is_finite(PhaseState{Vector{0.0}, Vector{1.0}}));
  CHECK_FALSE(is_finite(PhaseState{Vector{0.0}, Vector{std::nan("")}}));
}

TEST_CASE("at unit temperature and identity mass, log-density differences are energy differences") {
  const TargetModel target = make_gaussian(Vector{0.0, 0.0}, Vector{1.0, 3.0});
  auto config = unit_config(2);
  NoiseStream stream(97, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const PhaseState a{stream.normal_vector(2), stream.normal_vector(2)};
    const PhaseState b{stream.normal_vector(2), stream.normal_vector(2)};
    const double energy_a = target.potential(a.position) + kinetic_energy(a.momentum, config.mass);
    const double energy_b = target.potential(b.position) + kinetic_energy(b.momentum, config.mass);
    CHECK(log_boltzmann(a, target, config) - log_boltzmann(b, target, config) ==
          -(energy_a - energy_b));
  }
}
