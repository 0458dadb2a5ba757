// Command-line surface for the path-measure optimal transport library:
// exact adapted distances, smoothed upper bounds, the SMPD martingale test,
// and the seeded rate experiments with CSV/JSON/SVG reports.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathot/adapted.hpp"
#include "pathot/bicausal_lp.hpp"
#include "pathot/constants.hpp"
#include "pathot/experiments.hpp"
#include "pathot/measure_io.hpp"
#include "pathot/smooth_aw.hpp"
#include "pathot/smpd.hpp"
#include "pathot/wasserstein.hpp"

namespace {

pathot::discrete_measure load_measure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pathot::config_error("cannot open measure file: " + path);
  return pathot::load_measure(in);
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

std::vector<pathot::report_format> parse_formats(const std::string& csv) {
  std::vector<pathot::report_format> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "csv") out.push_back(pathot::report_format::csv);
    else if (tok == "json") out.push_back(pathot::report_format::json);
    else if (tok == "svg") out.push_back(pathot::report_format::svg);
    else throw pathot::config_error("unknown report format: " + tok);
  }
  if (out.empty()) throw pathot::config_error("no report formats given");
  return out;
}

pathot::experiment_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pathot::config_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw pathot::config_error(std::string("config: malformed JSON: ") + e.what());
  }
  return pathot::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adapted and smoothed Wasserstein distances for path measures"};
  app.require_subcommand(1);

  std::string mu_path, nu_path, measure_path, config_path, out_path, plan_path;
  std::string mode_str = "euclidean", bound_str = "compact", format_str = "csv,json";
  double p = 2.0, sigma = 1.0, beta = 0.0, alpha = 0.1;
  double radius = 3.0, e_q0 = 1.0, var_prefix = 0.0, q = 0.0, d_const = 1.0;
  double h_norm = 0.0, m_r = 0.0, e_q = 1.0;
  int T = 2, dim = 1, t_step = 1, split_reps = 3, quad = 0;
  std::uint64_t seed = 0;
  std::size_t mc_samples = 4096, pairs = 200;
  unsigned workers = 1;

  // aw exact | aw oracle
  auto* aw = app.add_subcommand("aw", "adapted Wasserstein distance");
  auto* aw_exact_cmd = aw->add_subcommand("exact", "backward recursion over history trees");
  aw_exact_cmd->add_option("--mu", mu_path)->required();
  aw_exact_cmd->add_option("--nu", nu_path)->required();
  aw_exact_cmd->add_option("--p", p);
  aw_exact_cmd->add_option("--plan-csv", plan_path, "write the bicausal plan as CSV");
  aw_exact_cmd->callback([&] {
    const auto mu = load_measure_file(mu_path), nu = load_measure_file(nu_path);
    pathot::aw_options opts;
    opts.want_plan = !plan_path.empty();
    auto res = pathot::aw_exact(mu, nu, p, opts);
    nlohmann::json j{{"value", res.value}, {"p", p}};
    if (opts.want_plan) {
      res.plan.residuals = pathot::verify_bicausal(res.plan, mu, nu);
      std::ofstream out(plan_path);
      if (!out) throw pathot::config_error("cannot open " + plan_path);
      res.plan.export_csv(out);
      j["plan"] = plan_path;
      j["causal_residual_x"] = res.plan.residuals.causal_residual_x;
      j["causal_residual_y"] = res.plan.residuals.causal_residual_y;
      j["marginal_residual"] = res.plan.residuals.marginal_residual;
    }
    print_json(j);
  });
  auto* aw_oracle_cmd = aw->add_subcommand("oracle", "LP over the bicausal polytope");
  aw_oracle_cmd->add_option("--mu", mu_path)->required();
  aw_oracle_cmd->add_option("--nu", nu_path)->required();
  aw_oracle_cmd->add_option("--p", p);
  aw_oracle_cmd->callback([&] {
    const auto mu = load_measure_file(mu_path), nu = load_measure_file(nu_path);
    print_json({{"value", pathot::aw_bruteforce_lp(mu, nu, p)}, {"p", p}});
  });

  // w2 discrete
  auto* w2 = app.add_subcommand("w2", "classical Wasserstein distance");
  auto* w2_discrete_cmd = w2->add_subcommand("discrete", "exact transportation LP");
  w2_discrete_cmd->add_option("--mu", mu_path)->required();
  w2_discrete_cmd->add_option("--nu", nu_path)->required();
  w2_discrete_cmd->add_option("--p", p);
  w2_discrete_cmd->add_option("--mode", mode_str, "euclidean | per-step");
  w2_discrete_cmd->add_option("--plan-csv", plan_path);
  w2_discrete_cmd->callback([&] {
    const auto mu = load_measure_file(mu_path), nu = load_measure_file(nu_path);
    const pathot::cost_mode mode = (mode_str == "per-step")
                                       ? pathot::cost_mode::per_step_sum
                                       : pathot::cost_mode::euclidean_power;
    auto res = pathot::wasserstein_discrete(mu, nu, pathot::cost_spec(p, mode));
    if (!plan_path.empty()) {
      std::ofstream out(plan_path);
      if (!out) throw pathot::config_error("cannot open " + plan_path);
      res.plan.export_csv(out);
    }
    print_json({{"value", res.value},
                {"objective", res.plan.objective},
                {"marginal_residual", res.plan.marginal_residual}});
  });

  // smooth-aw upper
  auto* saw = app.add_subcommand("smooth-aw", "smooth adapted Wasserstein bounds");
  auto* saw_upper_cmd = saw->add_subcommand("upper", "DPP upper-bound estimator");
  saw_upper_cmd->add_option("--mu", mu_path)->required();
  saw_upper_cmd->add_option("--nu", nu_path)->required();
  saw_upper_cmd->add_option("--sigma", sigma);
  saw_upper_cmd->add_option("--p", p);
  saw_upper_cmd->add_option("--mode", bound_str, "compact | subgaussian");
  saw_upper_cmd->add_option("--beta", beta, "0 selects 1/(4p(T+9))");
  saw_upper_cmd->add_option("--mc", mc_samples);
  saw_upper_cmd->add_option("--seed", seed);
  saw_upper_cmd->add_option("--out", out_path, "write terms as CSV (term,value,se)");
  saw_upper_cmd->callback([&] {
    const auto mu = load_measure_file(mu_path), nu = load_measure_file(nu_path);
    const auto mode = (bound_str == "subgaussian") ? pathot::bound_mode::subgaussian
                                                   : pathot::bound_mode::compact;
    const double b = (beta > 0.0) ? beta : pathot::default_beta(p, mu.T());
    const auto est = pathot::smooth_aw_upper(mu, nu, sigma, p, mode, b,
                                             pathot::mc_config{mc_samples, seed});
    nlohmann::json j{{"value", est.value},
                     {"structural", est.structural()},
                     {"standard_error", est.standard_error},
                     {"first_marginal_term", est.first_marginal_term},
                     {"kernel_terms", est.kernel_terms},
                     {"kernel_term_ses", est.kernel_term_ses},
                     {"prefactor", est.prefactor},
                     {"mode", bound_str},
                     {"mc_samples", mc_samples},
                     {"seed", seed}};
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw pathot::config_error("cannot open " + out_path);
      out << "term,value,se\n";
      out << "first_marginal," << pathot::format_double(est.first_marginal_term) << ",0\n";
      for (std::size_t t = 0; t < est.kernel_terms.size(); ++t)
        out << "kernel_t" << (t + 1) << ',' << pathot::format_double(est.kernel_terms[t])
            << ',' << pathot::format_double(est.kernel_term_ses[t]) << '\n';
      out << "prefactor," << pathot::format_double(est.prefactor) << ",0\n";
    }
    print_json(j);
  });

  // kernels scan
  auto* kernels = app.add_subcommand("kernels", "smoothed-kernel diagnostics");
  auto* scan_cmd = kernels->add_subcommand("scan", "local Lipschitz ratio scan");
  scan_cmd->add_option("--measure", measure_path)->required();
  scan_cmd->add_option("--sigma", sigma);
  scan_cmd->add_option("--t", t_step);
  scan_cmd->add_option("--p", p);
  scan_cmd->add_option("--radius", radius);
  scan_cmd->add_option("--pairs", pairs);
  scan_cmd->add_option("--seed", seed);
  scan_cmd->add_option("--out", out_path, "write samples as CSV");
  scan_cmd->callback([&] {
    const pathot::smoothed_measure sm(load_measure_file(measure_path), sigma);
    const auto res = pathot::kernel_lipschitz_scan(
        sm, t_step, p, pathot::scan_config{radius, pairs, seed, 128});
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw pathot::config_error("cannot open " + out_path);
      out << "separation,ratio\n";
      for (const auto& s : res.samples)
        out << pathot::format_double(s.separation) << ',' << pathot::format_double(s.ratio)
            << '\n';
    }
    print_json({{"max_ratio", res.max_ratio}, {"pairs", res.samples.size()}});
  });

  // smpd stat | smpd test
  auto* smpd = app.add_subcommand("smpd", "smoothed martingale projection statistic");
  auto* stat_cmd = smpd->add_subcommand("stat", "the projection statistic");
  stat_cmd->add_option("--measure", measure_path)->required();
  stat_cmd->add_option("--mc", mc_samples);
  stat_cmd->add_option("--seed", seed);
  stat_cmd->add_option("--quad", quad, "use Gauss-Hermite with this many nodes");
  stat_cmd->callback([&] {
    const auto m = load_measure_file(measure_path);
    const pathot::smpd_value v =
        (quad > 0) ? pathot::smpd_statistic(m, pathot::smpd_quadrature{quad})
                   : pathot::smpd_statistic(m, pathot::smpd_mc{mc_samples, seed});
    print_json({{"value", v.value}, {"standard_error", v.standard_error}});
  });
  auto* test_cmd = smpd->add_subcommand("test", "martingale hypothesis test");
  test_cmd->add_option("--measure", measure_path)->required();
  test_cmd->add_option("--alpha", alpha);
  test_cmd->add_option("--split-reps", split_reps);
  test_cmd->add_option("--seed", seed);
  test_cmd->add_option("--out", out_path, "write the decision report JSON");
  test_cmd->callback([&] {
    const auto m = load_measure_file(measure_path);
    const auto rep = pathot::smpd_test(m, alpha, split_reps, seed);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw pathot::config_error("cannot open " + out_path);
      out << rep.to_json().dump(2) << "\n";
    }
    print_json(rep.to_json());
  });

  // rates fast | sharp | noconv
  auto* rates = app.add_subcommand("rates", "seeded convergence-rate experiments");
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config")->required();
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--out", out_path, "override the config output directory");
    cmd->add_option("--format", format_str, "any of csv,json,svg");
    cmd->add_option("--workers", workers, "override the config worker count");
  };
  auto finalize_cfg = [&](pathot::experiment_config& cfg, CLI::App* cmd) {
    if (cmd->count("--seed")) cfg.seed = seed;
    if (cmd->count("--out")) cfg.out_dir = out_path;
    if (cmd->count("--workers")) cfg.workers = workers;
  };
  auto* fast_cmd = rates->add_subcommand("fast", "fast-rate slope of the structural bound");
  add_common(fast_cmd);
  fast_cmd->callback([&] {
    auto cfg = load_config(config_path);
    finalize_cfg(cfg, fast_cmd);
    const auto rep = pathot::run_rate_experiment(cfg);
    const auto files =
        pathot::emit_report(rep, parse_formats(format_str), cfg.out_dir, "fast_rate");
    print_json({{"slope", rep.fit.slope},
                {"ci", {rep.fit.ci_lo, rep.fit.ci_hi}},
                {"degenerate", rep.fit.degenerate},
                {"files", files}});
  });
  auto* sharp_cmd = rates->add_subcommand("sharp", "exact binomial sharpness series");
  add_common(sharp_cmd);
  sharp_cmd->callback([&] {
    auto cfg = load_config(config_path);
    finalize_cfg(cfg, sharp_cmd);
    const auto rep = pathot::run_sharpness_experiment(cfg.n_grid);
    const auto files =
        pathot::emit_report(rep, parse_formats(format_str), cfg.out_dir, "sharpness");
    print_json({{"slope", rep.fit.slope},
                {"ci", {rep.fit.ci_lo, rep.fit.ci_hi}},
                {"files", files}});
  });
  auto* noconv_cmd = rates->add_subcommand("noconv", "AW_1 vs W_1 between empirical pairs");
  add_common(noconv_cmd);
  noconv_cmd->callback([&] {
    auto cfg = load_config(config_path);
    finalize_cfg(cfg, noconv_cmd);
    const auto rep = pathot::run_nonconvergence_experiment(cfg);
    const auto fmts = parse_formats(format_str);
    auto files = pathot::emit_report(rep.aw, fmts, cfg.out_dir, "noconv_aw1");
    const auto more = pathot::emit_report(rep.w, fmts, cfg.out_dir, "noconv_w1");
    files.insert(files.end(), more.begin(), more.end());
    print_json({{"aw_slope", rep.aw.fit.slope},
                {"w_slope", rep.w.fit.slope},
                {"aw_median_first", pathot::median_estimate_at(rep.aw, cfg.n_grid.front())},
                {"aw_median_last", pathot::median_estimate_at(rep.aw, cfg.n_grid.back())},
                {"w_median_first", pathot::median_estimate_at(rep.w, cfg.n_grid.front())},
                {"w_median_last", pathot::median_estimate_at(rep.w, cfg.n_grid.back())},
                {"files", files}});
  });

  // constants qstar | c1 | c2
  auto* constants = app.add_subcommand("constants", "explicit constants of the bounds");
  auto* qstar_cmd = constants->add_subcommand("qstar", "moment threshold q*(p,T,beta)");
  qstar_cmd->add_option("--p", p);
  qstar_cmd->add_option("--T", T);
  qstar_cmd->add_option("--beta", beta, "0 selects 1/(4p(T+9))");
  qstar_cmd->callback([&] {
    const double b = (beta > 0.0) ? beta : pathot::default_beta(p, T);
    print_json({{"q_star", pathot::q_star(p, T, b)},
                {"theorem_q", pathot::theorem_q(p, T)},
                {"beta", b}});
  });
  auto* c1_cmd = constants->add_subcommand("c1", "dual-Sobolev kernel prefactor");
  c1_cmd->add_option("--p", p);
  c1_cmd->add_option("--d", dim);
  c1_cmd->add_option("--sigma", sigma);
  c1_cmd->add_option("--beta", beta)->required();
  c1_cmd->add_option("--e-q0", e_q0)->required();
  c1_cmd->add_option("--var-prefix", var_prefix);
  c1_cmd->callback([&] {
    print_json({{"c1", pathot::lipschitz_c1(p, dim, sigma, beta, e_q0, var_prefix)}});
  });
  auto* c2_cmd = constants->add_subcommand("c2", "dual-norm control prefactor");
  c2_cmd->add_option("--p", p);
  c2_cmd->add_option("--d", dim);
  c2_cmd->add_option("--sigma", sigma);
  c2_cmd->add_option("--beta", beta)->required();
  c2_cmd->add_option("--q", q)->required();
  c2_cmd->add_option("--D", d_const);
  c2_cmd->add_option("--h-norm", h_norm)->required();
  c2_cmd->add_option("--m-r", m_r)->required();
  c2_cmd->add_option("--e-q", e_q)->required();
  c2_cmd->add_option("--var-prefix", var_prefix);
  c2_cmd->callback([&] {
    print_json({{"c2", pathot::lipschitz_c2(p, dim, sigma, beta, q, d_const, h_norm, m_r,
                                            e_q, var_prefix)}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const pathot::config_error& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 2;
  } catch (const pathot::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << std::endl;
    return 3;
  } catch (const pathot::resource_error& e) {
    std::cerr << "resource error: " << e.what() << std::endl;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
