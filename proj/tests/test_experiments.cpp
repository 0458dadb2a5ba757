#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pathot/experiments.hpp"
#include "test_helpers.hpp"

using namespace pathot;
using namespace test_helpers;

namespace {

experiment_config small_fast_config(unsigned workers) {
  experiment_config cfg;
  cfg.experiment = "fast";
  cfg.sampler_spec = resample_sampler{branching_pair()};
  cfg.n_grid = {32, 64, 128};
  cfg.repetitions = 6;
  cfg.mc_samples = 48;
  cfg.seed = 20240u;
  cfg.workers = workers;
  return cfg;
}

}  // namespace

TEST_CASE("log-log slope fitting") {
  SECTION("exact power law") {
    std::vector<rate_row> rows;
    for (std::size_t n : {16, 32, 64, 128, 256})
      rows.push_back({n, 0, std::pow(static_cast<double>(n), -0.5), 0.0});
    const auto fit = fit_loglog_slope(rows);
    REQUIRE(std::fabs(fit.slope + 0.5) < 1e-12);
    REQUIRE(fit.ci_lo <= fit.slope);
    REQUIRE(fit.ci_hi >= fit.slope);
  }
  SECTION("constant series") {
    std::vector<rate_row> rows;
    for (std::size_t n : {16, 32, 64}) rows.push_back({n, 0, 0.37, 0.0});
    REQUIRE(std::fabs(fit_loglog_slope(rows).slope) < 1e-12);
  }
  SECTION("non-positive means are rejected") {
    std::vector<rate_row> rows = {{16, 0, 1.0, 0.0}, {32, 0, 0.0, 0.0}};
    REQUIRE_THROWS_AS(fit_loglog_slope(rows), numeric_error);
    std::vector<rate_row> single = {{16, 0, 1.0, 0.0}, {16, 1, 2.0, 0.0}};
    REQUIRE_THROWS_AS(fit_loglog_slope(single), numeric_error);
  }
  SECTION("slope reproduces from rows by the documented formula") {
    counter_rng rng(211);
    std::vector<rate_row> rows;
    for (std::size_t n : {16, 64, 256})
      for (int rep = 0; rep < 5; ++rep)
        rows.push_back({n, rep, 0.5 * std::pow(n, -0.4) * std::exp(0.05 * rng.normal()), 0.0});
    const auto fit = fit_loglog_slope(rows);
    // independent recomputation: per-n means, then the textbook OLS slope
    std::vector<double> x, y;
    for (std::size_t n : {16, 64, 256}) {
      double s = 0.0;
      int c = 0;
      for (const auto& r : rows)
        if (r.n == n) s += r.estimate, ++c;
      x.push_back(std::log(static_cast<double>(n)));
      y.push_back(std::log(s / c));
    }
    const double xb = (x[0] + x[1] + x[2]) / 3.0, yb = (y[0] + y[1] + y[2]) / 3.0;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < 3; ++i) {
      sxx += (x[i] - xb) * (x[i] - xb);
      sxy += (x[i] - xb) * (y[i] - yb);
    }
    REQUIRE(std::fabs(fit.slope - sxy / sxx) < 1e-12);
  }
  SECTION("near-unbiased on noisy synthetic power laws") {
    counter_rng rng(139);
    const double truth = -0.5;
    double mean_slope = 0.0;
    const int runs = 200;
    for (int run = 0; run < runs; ++run) {
      std::vector<rate_row> rows;
      for (std::size_t n : {16, 64, 256, 1024})
        for (int rep = 0; rep < 30; ++rep)
          rows.push_back({n, rep,
                          std::pow(static_cast<double>(n), truth) *
                              std::exp(0.1 * rng.normal()),
                          0.0});
      mean_slope += fit_loglog_slope(rows).slope;
    }
    REQUIRE(std::fabs(mean_slope / runs - truth) < 0.02);
  }
}

TEST_CASE("exact binomial deviation series") {
  REQUIRE(binomial_mean_abs_deviation(1) == 0.5);
  // closed form 2^{-n} C(n-1, floor(n/2)) cross-checks the summation
  REQUIRE(std::fabs(binomial_mean_abs_deviation(4) - 3.0 / 16.0) < 1e-15);
  for (std::size_t n : {2, 3, 5, 8, 16, 64, 512, 1024}) {
    const double closed = std::exp(std::lgamma(static_cast<double>(n)) -
                                   std::lgamma(std::floor(n / 2.0) + 1.0) -
                                   std::lgamma(n - std::floor(n / 2.0)) -
                                   static_cast<double>(n) * std::log(2.0));
    REQUIRE(std::fabs(binomial_mean_abs_deviation(n) - closed) < 1e-12 * closed);
  }

  std::vector<std::size_t> grid;
  for (int k = 4; k <= 14; ++k) grid.push_back(std::size_t{1} << k);
  const auto rep = run_sharpness_experiment(grid);
  REQUIRE(rep.fit.slope > -0.55);
  REQUIRE(rep.fit.slope < -0.45);
}

TEST_CASE("rate experiment configs validate") {
  auto cfg = small_fast_config(1);
  cfg.n_grid = {32};
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg.n_grid = {64, 32};
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = small_fast_config(1);
  cfg.repetitions = 1;
  REQUIRE_THROWS_AS(cfg.validate(), config_error);
  cfg = small_fast_config(1);
  cfg.sampler_spec = gaussian_ar_sampler{};
  REQUIRE_THROWS_AS(run_rate_experiment(cfg), config_error);
}

TEST_CASE("degenerate estimates are reported, not fitted") {
  auto cfg = small_fast_config(1);
  cfg.sampler_spec = exact_base_sampler{branching_pair()};
  cfg.n_grid = {8, 16};
  cfg.repetitions = 3;
  const auto rep = run_rate_experiment(cfg);
  for (const auto& r : rep.rows) REQUIRE(r.estimate == 0.0);
  REQUIRE(rep.fit.degenerate);
}

TEST_CASE("experiment runs are deterministic and worker-invariant") {
  const auto rep1 = run_rate_experiment(small_fast_config(1));
  const auto rep8 = run_rate_experiment(small_fast_config(8));
  std::ostringstream csv1, csv8;
  write_rows_csv(csv1, rep1.rows);
  write_rows_csv(csv8, rep8.rows);
  REQUIRE(csv1.str() == csv8.str());

  const auto rep1b = run_rate_experiment(small_fast_config(1));
  std::ostringstream csv1b;
  write_rows_csv(csv1b, rep1b.rows);
  REQUIRE(csv1.str() == csv1b.str());
}

TEST_CASE("report emission round trips") {
  const auto rep = run_rate_experiment(small_fast_config(2));
  const std::string dir = (std::filesystem::temp_directory_path() / "pathot_report_test").string();
  const auto files = emit_report(
      rep, {report_format::csv, report_format::json, report_format::svg}, dir, "fast_rate");
  REQUIRE(files.size() == 3);

  SECTION("csv reload reproduces the slope") {
    std::ifstream in(files[0]);
    const auto rows = read_rows_csv(in);
    REQUIRE(rows.size() == rep.rows.size());
    const auto fit = fit_loglog_slope(rows);
    REQUIRE(std::fabs(fit.slope - rep.fit.slope) < 1e-12);
  }
  SECTION("svg carries one fitted line and one point per n") {
    std::ifstream in(files[2]);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string svg = buf.str();
    std::size_t lines = 0, points = 0, pos = 0;
    while ((pos = svg.find("<line", pos)) != std::string::npos) ++lines, ++pos;
    pos = 0;
    while ((pos = svg.find("<circle", pos)) != std::string::npos) ++points, ++pos;
    REQUIRE(lines == 1);
    REQUIRE(points == 3);  // one per grid n
  }
  SECTION("empty reports are rejected") {
    rate_report empty;
    REQUIRE_THROWS_AS(emit_report(empty, {report_format::csv}, dir, "x"), config_error);
  }
}

TEST_CASE("experiment config json round trip") {
  auto cfg = small_fast_config(3);
  cfg.beta = 0.01;
  const auto j = config_to_json(cfg);
  const auto back = config_from_json(j);
  REQUIRE(back.n_grid == cfg.n_grid);
  REQUIRE(back.repetitions == cfg.repetitions);
  REQUIRE(back.beta == cfg.beta);
  REQUIRE(back.workers == cfg.workers);
  REQUIRE(std::holds_alternative<resample_sampler>(back.sampler_spec));
}

TEST_CASE("nonconvergence experiment requires the AR sampler and caps n") {
  experiment_config cfg;
  cfg.experiment = "noconv";
  cfg.sampler_spec = resample_sampler{branching_pair()};
  cfg.n_grid = {8, 16};
  cfg.repetitions = 3;
  REQUIRE_THROWS_AS(run_nonconvergence_experiment(cfg), config_error);

  cfg.sampler_spec = gaussian_ar_sampler{2, 0.5, 1.0};
  cfg.n_grid = {8, 4096};
  REQUIRE_THROWS_AS(run_nonconvergence_experiment(cfg), resource_error);

  cfg.n_grid = {8, 16};
  cfg.workers = 2;
  const auto rep = run_nonconvergence_experiment(cfg);
  REQUIRE(rep.aw.rows.size() == 6);
  REQUIRE(rep.w.rows.size() == 6);
  for (std::size_t i = 0; i < rep.aw.rows.size(); ++i)
    REQUIRE(rep.aw.rows[i].estimate >= rep.w.rows[i].estimate - 1e-9);
}
