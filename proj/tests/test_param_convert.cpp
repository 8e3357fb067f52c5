#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "ulmc/param_convert.hpp"
#include "ulmc/rng.hpp"

using namespace ulmc;

TEST_CASE("sgd to sampler: reference grid point") {
  const auto mapped = sgd_to_sampler({1e-4, 0.9, 50000});
  REQUIRE(mapped.has_value());
  CHECK(mapped->step_size == doctest::Approx(std::sqrt(2e-9)).epsilon(1e-14));
  CHECK(mapped->step_size == doctest::Approx(4.4721359549995794e-05).epsilon(1e-12));
  CHECK(mapped->friction ==
        doctest::Approx(-std::log(0.9) / std::sqrt(2e-9)).epsilon(1e-14));
}

TEST_CASE("sgd to sampler: zero momentum signals the infinite-friction limit") {
  CHECK_FALSE(sgd_to_sampler({1e-3, 0.0, 100}).has_value());
}

TEST_CASE("sampler to sgd: boundary and unit cases") {
  const SGDParams hamiltonian = sampler_to_sgd(0.5, 0.0, 10);
  CHECK(hamiltonian.momentum == 1.0);  // zero friction: pure Hamiltonian regime
  const SGDParams unit = sampler_to_sgd(1.0, 1.0, 1);
  CHECK(unit.learning_rate == 1.0);
}

TEST_CASE("conversions round-trip at 1e-12") {
  NoiseStream stream(211, 0);
  for (int rep = 0; rep < 1000; ++rep) {
    SGDParams params;
    params.learning_rate = std::pow(10.0, -6.0 + 6.0 * stream.uniform01());
    params.momentum = 0.01 + 0.98 * stream.uniform01();
    params.data_size = 1 + static_cast<std::int64_t>(stream.uniform_below(100000));

    const auto mapped = sgd_to_sampler(params);
    REQUIRE(mapped.has_value());
    const SGDParams back = sampler_to_sgd(mapped->step_size, mapped->friction, params.data_size);
    CHECK(back.learning_rate == doctest::Approx(params.learning_rate).epsilon(1e-12));
    CHECK(back.momentum == doctest::Approx(params.momentum).epsilon(1e-12));

    const SamplerParams em = sgd_to_em_sampler(params);
    const SGDParams em_back = em_sampler_to_sgd(em.step_size, em.friction, params.data_size);
    CHECK(em_back.learning_rate == doctest::Approx(params.learning_rate).epsilon(1e-12));
    CHECK(em_back.momentum == doctest::Approx(params.momentum).epsilon(1e-12));
  }
}

TEST_CASE("first-order variant agrees with the exponential map for small friction-step products") {
  // exp(-x) = 1 - x + O(x^2): the two momentum maps agree to second order.
  const double lr = 1e-4;
  const std::int64_t n = 50000;
  for (double momentum : {0.99, 0.999, 0.9999}) {
    const auto exact = sgd_to_sampler({lr, momentum, n});
    const auto first_order = sgd_to_em_sampler({lr, momentum, n});
    REQUIRE(exact.has_value());
    const double x = exact->friction * exact->step_size;  // = -log(momentum)
    const double x_se = first_order.friction * first_order.step_size;  // = 1 - momentum
    CHECK(std::abs(x - x_se) < x * x);
  }
}

TEST_CASE("friction decreases as momentum grows") {
  const double lr = 1e-3;
  const std::int64_t n = 1000;
  double previous = 1e300;
  for (double momentum : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    const auto mapped = sgd_to_sampler({lr, momentum, n});
    REQUIRE(mapped.has_value());
    CHECK(mapped->friction < previous);
    previous = mapped->friction;
  }
}

TEST_CASE("momentum one is the zero-friction boundary of the first-order map") {
  // momentum = 1 is outside the domain; approaching it sends friction to 0.
  const auto near_one = sgd_to_em_sampler({1e-3, 0.999999, 100});
  CHECK(near_one.friction == doctest::Approx(0.0).epsilon(1.0).scale(1e-3));
  CHECK_THROWS_AS(sgd_to_em_sampler({1e-3, 1.0, 100}), std::invalid_argument);
}

TEST_CASE("conversion input validation") {
  CHECK_THROWS_AS(sgd_to_sampler({0.0, 0.5, 10}), std::invalid_argument);
  CHECK_THROWS_AS(sgd_to_sampler({1e-3, -0.1, 10}), std::invalid_argument);
  CHECK_THROWS_AS(sgd_to_sampler({1e-3, 0.5, 0}), std::invalid_argument);
  CHECK_THROWS_AS(sampler_to_sgd(0.0, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(sampler_to_sgd(0.1, -1.0, 10), std::invalid_argument);
}
