#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pathot/wasserstein.hpp"
#include "test_helpers.hpp"

using namespace pathot;
using namespace test_helpers;

TEST_CASE("two point masses transport at their distance") {
  const auto a = point_mass({0.0}, 1, 1);
  const auto b = point_mass({3.0}, 1, 1);
  const auto r = wasserstein_discrete(a, b, cost_spec(1.0, cost_mode::euclidean_power));
  REQUIRE(std::fabs(r.value - 3.0) < 1e-12);
}

TEST_CASE("distance to itself is zero") {
  counter_rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = random_continuous_measure(rng, 2, 2, 8);
    for (double p : {1.0, 1.5, 2.0}) {
      const auto r = wasserstein_discrete(m, m, cost_spec(p, cost_mode::euclidean_power));
      REQUIRE(r.value < 1e-10);
    }
  }
}

TEST_CASE("the shifted branching pair sits at distance eps") {
  for (double eps : {0.1, 0.01}) {
    const auto r = wasserstein_discrete(shifted_pair(eps), branching_pair(),
                                        cost_spec(1.0, cost_mode::euclidean_power));
    REQUIRE(std::fabs(r.value - eps) < 1e-9);
  }
}

TEST_CASE("quantile route agrees with the LP on the line") {
  SECTION("hand instances") {
    const auto mu = discrete_measure(1, 1, {0.0, 1.0}, {0.5, 0.5});
    const auto nu = point_mass({0.5}, 1, 1);
    REQUIRE(std::fabs(wasserstein_1d_quantile(mu, nu, 1.0) - 0.5) < 1e-12);
    REQUIRE(wasserstein_1d_quantile(mu, mu, 2.0) < 1e-12);
    const auto shifted = discrete_measure(1, 1, {0.7, 1.7}, {0.5, 0.5});
    REQUIRE(std::fabs(wasserstein_1d_quantile(mu, shifted, 1.0) - 0.7) < 1e-12);
  }
  SECTION("100 random instances against the LP") {
    counter_rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      const auto mu = random_continuous_measure(rng, 1, 1, 20);
      const auto nu = random_continuous_measure(rng, 1, 1, 20);
      const double p = (trial % 2 == 0) ? 1.0 : 2.0;
      const double q = wasserstein_1d_quantile(mu, nu, p);
      const double lp =
          wasserstein_discrete(mu, nu, cost_spec(p, cost_mode::euclidean_power)).value;
      REQUIRE(std::fabs(q - lp) < 1e-8);
    }
  }
  SECTION("dimension mismatch is rejected") {
    const auto m2 = branching_pair();
    REQUIRE_THROWS_AS(wasserstein_1d_quantile(m2, m2, 2.0), config_error);
  }
}

TEST_CASE("metric axioms on random instances") {
  counter_rng rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const auto a = random_continuous_measure(rng, 2, 1, 5);
    const auto b = random_continuous_measure(rng, 2, 1, 5);
    const auto c = random_continuous_measure(rng, 2, 1, 5);
    const cost_spec cost(2.0, cost_mode::euclidean_power);
    const double ab = wasserstein_discrete(a, b, cost).value;
    const double ba = wasserstein_discrete(b, a, cost).value;
    const double ac = wasserstein_discrete(a, c, cost).value;
    const double cb = wasserstein_discrete(c, b, cost).value;
    REQUIRE(std::fabs(ab - ba) < 1e-10);
    REQUIRE(ab <= ac + cb + 1e-8);
  }
}

TEST_CASE("plans satisfy marginal and objective invariants") {
  counter_rng rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_continuous_measure(rng, 2, 1, 9);
    const auto b = random_continuous_measure(rng, 2, 1, 9);
    const cost_spec cost(1.5, cost_mode::per_step_sum);
    const auto r = wasserstein_discrete(a, b, cost);
    REQUIRE(r.plan.marginal_residual <= 1e-9);
    double obj = 0.0;
    for (const auto& e : r.plan.entries)
      obj += e.mass * path_cost(a.atom(e.i), b.atom(e.j), a.d(), cost);
    REQUIRE(std::fabs(obj - r.plan.objective) < 1e-10);
  }
}

TEST_CASE("p = 2 cost modes agree") {
  counter_rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_continuous_measure(rng, 3, 2, 6);
    const auto b = random_continuous_measure(rng, 3, 2, 6);
    const double full =
        wasserstein_discrete(a, b, cost_spec(2.0, cost_mode::euclidean_power)).plan.objective;
    const double steps =
        wasserstein_discrete(a, b, cost_spec(2.0, cost_mode::per_step_sum)).plan.objective;
    REQUIRE(std::fabs(full - steps) < 1e-10);
  }
}

TEST_CASE("shared discrete noise contracts the distance") {
  counter_rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = random_continuous_measure(rng, 2, 1, 4);
    const auto nu = random_continuous_measure(rng, 2, 1, 4);
    const auto eta = random_continuous_measure(rng, 2, 1, 3, 0.3);
    const cost_spec cost(2.0, cost_mode::euclidean_power);
    const double plain = wasserstein_discrete(mu, nu, cost).value;
    const double smoothed =
        wasserstein_discrete(convolve_discrete(mu, eta), convolve_discrete(nu, eta), cost)
            .value;
    REQUIRE(smoothed <= plain + 1e-9);
  }
}

TEST_CASE("size caps and shape mismatches are reported") {
  counter_rng rng(47);
  const auto a = random_continuous_measure(rng, 2, 1, 10);
  const auto b = random_continuous_measure(rng, 2, 1, 10);
  REQUIRE_THROWS_AS(
      wasserstein_discrete(a, b, cost_spec(2.0, cost_mode::euclidean_power), 4),
      resource_error);
  const auto c = random_continuous_measure(rng, 3, 1, 4);
  REQUIRE_THROWS_AS(wasserstein_discrete(a, c, cost_spec(2.0, cost_mode::euclidean_power)),
                    config_error);
  REQUIRE_THROWS_AS(cost_spec(0.5, cost_mode::euclidean_power), config_error);
}
