#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pathot/smoothing.hpp"
#include "pathot/rng.hpp"
#include "test_helpers.hpp"

using namespace pathot;
using namespace test_helpers;

namespace {

// Independent quantile oracle: plain bisection on a directly coded mixture
// CDF, run to interval width 1e-13.
double oracle_quantile(const kernel_mixture& k, double u) {
  auto cdf = [&](double x) {
    double s = 0.0;
    for (std::size_t j = 0; j < k.components(); ++j)
      s += std::exp(k.log_weights[j]) * 0.5 *
           std::erfc(-(x - k.means[j]) / (k.sigma * std::sqrt(2.0)));
    return s;
  };
  double lo = *std::min_element(k.means.begin(), k.means.end()) - 14.0 * k.sigma;
  double hi = *std::max_element(k.means.begin(), k.means.end()) + 14.0 * k.sigma;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Independent W_p oracle: adaptive Simpson over the quantile difference on
// the same truncated interval the production quadrature uses.
double oracle_wp(const kernel_mixture& a, const kernel_mixture& b, double p) {
  const double integral = adaptive_simpson(
      [&](double u) {
        return std::pow(std::fabs(oracle_quantile(a, u) - oracle_quantile(b, u)), p);
      },
      1e-6, 1.0 - 1e-6, 1e-11);
  return std::pow(integral, 1.0 / p);
}

kernel_mixture random_mixture(counter_rng& rng, int max_comp = 4) {
  const int k = 1 + static_cast<int>(rng.uniform() * max_comp);
  std::vector<double> means(k), w(k);
  for (int j = 0; j < k; ++j) {
    means[j] = 3.0 * rng.normal();
    w[j] = 0.2 + rng.uniform();
  }
  return mixture_1d(std::move(means), std::move(w), 0.5 + rng.uniform());
}

}  // namespace

TEST_CASE("smoothed density equals the direct mixture sum") {
  counter_rng rng(83);
  const auto base = random_continuous_measure(rng, 2, 1, 5);
  const smoothed_measure sm(base, 0.7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(base.dim());
    for (double& v : x) v = 2.0 * rng.normal();
    double direct = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
      double prod = base.weight(j);
      for (std::size_t c = 0; c < x.size(); ++c)
        prod *= normal_pdf(x[c], base.atom(j)[c], sm.sigma);
      direct += prod;
    }
    REQUIRE(std::fabs(sm.density(x) - direct) < 1e-12 * (1.0 + direct));
  }
}

TEST_CASE("disintegration weights") {
  SECTION("single atom: kernel is N(x_{t+1}, sigma^2) for every prefix") {
    const smoothed_measure sm(point_mass({0.4, 1.7}, 2, 1), 0.9);
    for (double prefix : {-3.0, 0.0, 5.0}) {
      const auto k = disintegrate(sm, std::vector<double>{prefix});
      REQUIRE(k.components() == 1);
      REQUIRE(k.means[0] == 1.7);
      REQUIRE(k.sigma == 0.9);
      REQUIRE(std::fabs(k.log_weights[0]) < 1e-15);
    }
  }
  SECTION("symmetric prefixes split the weight evenly") {
    const discrete_measure base(2, 1, {-1.0, 5.0, 1.0, -5.0}, {0.5, 0.5});
    const auto k = disintegrate(smoothed_measure(base, 1.0), std::vector<double>{0.0});
    REQUIRE(k.components() == 2);
    REQUIRE(std::fabs(k.weight(0) - 0.5) < 1e-12);
    REQUIRE(std::fabs(k.weight(1) - 0.5) < 1e-12);
  }
  SECTION("two atoms at 0 and 2, query at 0") {
    const discrete_measure base(2, 1, {0.0, 7.0, 2.0, -7.0}, {0.5, 0.5});
    const auto k = disintegrate(smoothed_measure(base, 1.0), std::vector<double>{0.0});
    const double expected = 1.0 / (1.0 + std::exp(-2.0));
    // components are sorted by mean; the atom at 0 continues to +7
    REQUIRE(std::fabs(k.weight(1) - expected) < 1e-9);
    REQUIRE(std::fabs(expected - 0.880797) < 1e-6);
  }
  SECTION("normalization is exact and scale-free") {
    counter_rng rng(89);
    const auto base = random_continuous_measure(rng, 3, 1, 6);
    const smoothed_measure sm(base, 1.3);
    const auto k = disintegrate(sm, std::vector<double>{0.3, -0.2});
    REQUIRE(std::fabs(log_sum_exp(k.log_weights)) < 1e-12);
    // adding a constant to every log weight does not change the mixture
    auto scaled = mixture_1d({0.0, 1.0}, {0.25, 0.75}, 1.0);
    auto scaled2 = mixture_1d({0.0, 1.0}, {25.0, 75.0}, 1.0);
    REQUIRE(std::fabs(scaled.log_weights[0] - scaled2.log_weights[0]) < 1e-13);
    REQUIRE(std::fabs(scaled.log_weights[1] - scaled2.log_weights[1]) < 1e-13);
  }
  SECTION("t out of range") {
    const smoothed_measure sm(branching_pair(), 1.0);
    REQUIRE_THROWS_AS(disintegrate(sm, std::vector<double>{0.0, 1.0}), config_error);
  }
}

TEST_CASE("mixture quantiles") {
  SECTION("median of a single Gaussian is its mean") {
    const auto k = single_gaussian(2.5, 1.4);
    REQUIRE(std::fabs(mixture_quantile(k, 0.5) - 2.5) < 1e-10);
  }
  SECTION("symmetric mixture has median zero") {
    const auto k = mixture_1d({-1.0, 1.0}, {0.5, 0.5}, 1.0);
    REQUIRE(std::fabs(mixture_quantile(k, 0.5)) < 1e-10);
  }
  SECTION("quantile of a separated mixture matches the oracle") {
    const auto k = mixture_1d({0.0, 4.0}, {0.5, 0.5}, 1.0);
    REQUIRE(std::fabs(mixture_quantile(k, 0.25) - oracle_quantile(k, 0.25)) < 1e-9);
  }
  SECTION("quantile inverts the cdf on random mixtures") {
    counter_rng rng(97);
    for (int trial = 0; trial < 25; ++trial) {
      const auto k = random_mixture(rng);
      const double u = rng.uniform();
      REQUIRE(std::fabs(mixture_cdf(k, mixture_quantile(k, u)) - u) < 1e-9);
    }
  }
  SECTION("invalid u rejected") {
    const auto k = single_gaussian(0.0, 1.0);
    REQUIRE_THROWS_AS(mixture_quantile(k, 0.0), config_error);
    REQUIRE_THROWS_AS(mixture_quantile(k, 1.0), config_error);
  }
}

TEST_CASE("1-d mixture transport distances") {
  SECTION("identical mixtures are at distance zero") {
    const auto k = mixture_1d({-1.0, 2.0}, {0.3, 0.7}, 0.8);
    REQUIRE(w_p_mixture_1d(k, k, 2.0).value < 1e-12);
  }
  SECTION("location shift: N(0,1) vs N(3,1) at p = 2") {
    // constant quantile gap: the truncated quadrature sees 3 sqrt(1 - 2e-6)
    const auto r = w_p_mixture_1d(single_gaussian(0.0, 1.0), single_gaussian(3.0, 1.0), 2.0);
    REQUIRE(std::fabs(r.value - 3.0) < 1e-5);
    const double oracle =
        oracle_wp(single_gaussian(0.0, 1.0), single_gaussian(3.0, 1.0), 2.0);
    REQUIRE(std::fabs(r.value - oracle) < 1e-8);
  }
  SECTION("scale change: N(0,1) vs N(0,4) at p = 2") {
    // the integrand steepens at the truncated endpoints, which costs the
    // fixed 256-node rule a few digits against the adaptive oracle
    const auto a = single_gaussian(0.0, 1.0), b = single_gaussian(0.0, 2.0);
    const auto r = w_p_mixture_1d(a, b, 2.0);
    const double oracle = oracle_wp(a, b, 2.0);
    REQUIRE(std::fabs(r.value - oracle) < 5e-5);
    REQUIRE(std::fabs(r.value - 1.0) < 1e-3);  // comonotone scaling gives 1
    REQUIRE(r.value * r.value + r.tail_bound >= 1.0 - 1e-6);  // tail bound honest
  }
  SECTION("metric properties on random mixtures") {
    counter_rng rng(101);
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = random_mixture(rng), b = random_mixture(rng), c = random_mixture(rng);
      const double ab = w_p_mixture_1d(a, b, 2.0).value;
      const double ba = w_p_mixture_1d(b, a, 2.0).value;
      REQUIRE(std::fabs(ab - ba) < 1e-12);
      REQUIRE(ab <= w_p_mixture_1d(a, c, 2.0).value + w_p_mixture_1d(c, b, 2.0).value + 1e-6);
    }
  }
  SECTION("node floor enforced") {
    const auto k = single_gaussian(0.0, 1.0);
    REQUIRE_THROWS_AS(w_p_mixture_1d(k, k, 2.0, 4), config_error);
  }
}

TEST_CASE("smoothed exponential moment identity") {
  SECTION("closed form on a point mass") {
    const smoothed_measure sm(point_mass({0.0, 0.0}, 2, 1), 1.0);
    REQUIRE(std::fabs(exp_moment_smoothed(sm, 0.25).value - 2.0) < 1e-12);
    REQUIRE(exp_moment_smoothed(sm, 0.0).value == 1.0);
    REQUIRE_THROWS_AS(exp_moment_smoothed(sm, 0.5), numeric_error);
  }
  SECTION("monte carlo agreement on random bases") {
    counter_rng rng(103);
    for (int trial = 0; trial < 3; ++trial) {
      const auto base = random_continuous_measure(rng, 2, 1, 4, 0.5);
      const double sigma = 0.8, theta = 0.2;
      const smoothed_measure sm(base, sigma);
      const double exact = exp_moment_smoothed(sm, theta).value;

      const std::size_t draws = 200000;
      kahan_sum sum, sum_sq;
      counter_rng mc(derive_seed(500, trial));
      for (std::size_t i = 0; i < draws; ++i) {
        const std::size_t j = static_cast<std::size_t>(mc.uniform() * base.size());
        double sq = 0.0;
        for (std::size_t c = 0; c < base.dim(); ++c) {
          const double v = base.atom(j)[c] + sigma * mc.normal();
          sq += v * v;
        }
        const double w = std::exp(theta * sq) * base.weight(j) * base.size();
        sum.add(w);
        sum_sq.add(w * w);
      }
      const double mean = sum.value() / draws;
      const double se = std::sqrt((sum_sq.value() / draws - mean * mean) / (draws - 1));
      REQUIRE(std::fabs(mean - exact) < 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("gaussian product integral") {
  SECTION("zero offset") {
    const std::vector<double> x{0.0};
    REQUIRE(std::fabs(gaussian_product_integral(1.0, 2.0, x) - std::sqrt(M_PI)) < 1e-12);
  }
  SECTION("unit offset against adaptive quadrature") {
    const std::vector<double> x{1.0};
    const double v = gaussian_product_integral(1.0, 2.0, x);
    REQUIRE(std::fabs(v - std::sqrt(M_PI) * std::exp(2.0)) < 1e-9 * v);
    const double quad = adaptive_simpson(
        [](double y) { return std::exp(1.0 * y * y - 2.0 * (1.0 - y) * (1.0 - y)); },
        -30.0, 30.0, 1e-12);
    REQUIRE(std::fabs(v - quad) < 1e-8 * v);
  }
  SECTION("product structure across dimensions") {
    const std::vector<double> x1{0.7};
    const std::vector<double> x2{0.7, 0.7};
    const double v1 = gaussian_product_integral(0.5, 1.25, x1);
    const double v2 = gaussian_product_integral(0.5, 1.25, x2);
    REQUIRE(std::fabs(v2 - v1 * v1) < 1e-10 * v2);
  }
  SECTION("parameter order enforced") {
    const std::vector<double> x{0.0};
    REQUIRE_THROWS_AS(gaussian_product_integral(2.0, 1.0, x), config_error);
    REQUIRE_THROWS_AS(gaussian_product_integral(2.0, 2.0, x), config_error);
  }
}

TEST_CASE("kernel density ratio and its lower bound") {
  const double p = 2.0, sigma = 1.0;
  const double eta = std::sqrt(1.0 - 1.0 / (2.0 * p));

  SECTION("single atom at zero: the prefix factor cancels") {
    const smoothed_measure sm(point_mass({0.0, 0.0}, 2, 1), sigma);
    for (double x2 : {-2.0, 0.0, 1.5}) {
      const std::vector<double> pt{0.3, x2};
      const double expected = normal_pdf(x2, 0.0, sigma) / normal_pdf(x2, 0.0, sigma * eta);
      REQUIRE(std::fabs(density_ratio(sm, pt, eta) - expected) < 1e-10 * expected);
    }
  }
  SECTION("ratio dominates the lower bound on random compact bases") {
    counter_rng rng(107);
    const double beta = 0.05;
    for (int trial = 0; trial < 5; ++trial) {
      const auto base = random_grid_measure(rng, 2, 1, 5);
      const smoothed_measure sm(base, sigma);
      for (int pt_trial = 0; pt_trial < 200; ++pt_trial) {
        const std::vector<double> pt{3.0 * rng.normal(), 3.0 * rng.normal()};
        const double ratio = density_ratio(sm, pt, eta);
        const double lb = density_lower_bound(sm, pt, beta, p);
        REQUIRE(ratio >= lb * (1.0 - 1e-9));
      }
      // deep in the prefix tail the bound still holds
      const std::vector<double> far{10.0, 0.5};
      REQUIRE(density_ratio(sm, far, eta) >=
              density_lower_bound(sm, far, beta, p) * (1.0 - 1e-9));
    }
  }
  SECTION("eta range enforced") {
    const smoothed_measure sm(branching_pair(), 1.0);
    const std::vector<double> pt{0.0, 0.0};
    REQUIRE_THROWS_AS(density_ratio(sm, pt, 1.5), config_error);
    REQUIRE_THROWS_AS(density_lower_bound(sm, pt, 0.9, 2.0), numeric_error);
  }
}
