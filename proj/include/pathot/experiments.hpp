#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathot/adapted.hpp"
#include "pathot/constants.hpp"
#include "pathot/errors.hpp"
#include "pathot/measure_io.hpp"
#include "pathot/parallel.hpp"
#include "pathot/samplers.hpp"
#include "pathot/smooth_aw.hpp"
#include "pathot/wasserstein.hpp"

namespace pathot {

inline constexpr const char* library_version = "pathot 0.1.0";

struct experiment_config {
  std::string experiment;  // "fast" | "sharp" | "noconv"
  sampler sampler_spec = iid_gaussian_sampler{};
  std::vector<std::size_t> n_grid;
  int repetitions = 50;
  double sigma = 1.0;
  double p = 2.0;
  double beta = 0.0;  // 0 -> default 1/(4p(T+9))
  std::size_t mc_samples = 256;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned workers = 1;
  std::size_t aw_cap_n = 2048;  // largest n the noconv DPP is allowed to take

  void validate() const {
    if (n_grid.size() < 2) throw config_error("experiment: n grid needs at least 2 entries");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
      if (n_grid[i] >= n_grid[i + 1])
        throw config_error("experiment: n grid must be strictly increasing");
    if (experiment != "sharp" && repetitions < 3)
      throw config_error("experiment: need at least 3 repetitions");
    if (!(sigma > 0.0)) throw config_error("experiment: sigma must be positive");
    if (!(p >= 1.0)) throw config_error("experiment: p must be >= 1");
    if (mc_samples < 1) throw config_error("experiment: mc_samples must be >= 1");
  }
};

inline experiment_config config_from_json(const nlohmann::json& j) {
  experiment_config c;
  c.experiment = j.value("experiment", std::string("fast"));
  if (j.contains("sampler")) c.sampler_spec = sampler_from_json(j.at("sampler"));
  if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  c.repetitions = j.value("repetitions", 50);
  c.sigma = j.value("sigma", 1.0);
  c.p = j.value("p", 2.0);
  c.beta = j.value("beta", 0.0);
  c.mc_samples = j.value("mc_samples", std::size_t{256});
  c.seed = j.value("seed", std::uint64_t{0});
  c.out_dir = j.value("out_dir", std::string("."));
  c.workers = j.value("workers", 1u);
  return c;
}

inline nlohmann::json config_to_json(const experiment_config& c) {
  return nlohmann::json{{"experiment", c.experiment},
                        {"sampler", sampler_to_json(c.sampler_spec)},
                        {"n_grid", c.n_grid},
                        {"repetitions", c.repetitions},
                        {"sigma", c.sigma},
                        {"p", c.p},
                        {"beta", c.beta},
                        {"mc_samples", c.mc_samples},
                        {"seed", c.seed},
                        {"out_dir", c.out_dir},
                        {"workers", c.workers}};
}

struct rate_row {
  std::size_t n = 0;
  int rep = 0;
  double estimate = 0.0;
  double se = 0.0;
};

struct slope_fit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double robust_se = 0.0;
  bool degenerate = false;
};

struct rate_report {
  std::vector<rate_row> rows;
  slope_fit fit;
  nlohmann::json metadata;
};

// OLS of log(mean estimate per n) on log n. Documented formula (tests
// recompute it independently):
//   x_i = log n_i, y_i = log mean_i, xb = mean(x), yb = mean(y),
//   slope = sum (x_i-xb)(y_i-yb) / sum (x_i-xb)^2, intercept = yb - slope*xb,
//   HC1 robust variance = [k/(k-2)] sum (x_i-xb)^2 e_i^2 / (sum (x_i-xb)^2)^2,
//   95% CI = slope -+ 1.96 sqrt(variance).
inline slope_fit fit_loglog_slope(const std::vector<rate_row>& rows) {
  std::vector<std::size_t> ns;
  std::vector<double> sums, counts;
  for (const auto& r : rows) {
    auto it = std::find(ns.begin(), ns.end(), r.n);
    if (it == ns.end()) {
      ns.push_back(r.n);
      sums.push_back(r.estimate);
      counts.push_back(1.0);
    } else {
      const std::size_t k = static_cast<std::size_t>(it - ns.begin());
      sums[k] += r.estimate;
      counts[k] += 1.0;
    }
  }
  const std::size_t k = ns.size();
  if (k < 2) throw numeric_error("fit_loglog_slope: need at least 2 distinct n");
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double mean = sums[i] / counts[i];
    if (!(mean > 0.0)) throw numeric_error("fit_loglog_slope: non-positive mean estimate");
    x[i] = std::log(static_cast<double>(ns[i]));
    y[i] = std::log(mean);
  }
  double xb = 0.0, yb = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    xb += x[i];
    yb += y[i];
  }
  xb /= k;
  yb /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
  }
  slope_fit f;
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  double meat = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    meat += (x[i] - xb) * (x[i] - xb) * e * e;
  }
  const double adj = (k > 2) ? static_cast<double>(k) / (k - 2.0) : 1.0;
  f.robust_se = std::sqrt(adj * meat / (sxx * sxx));
  f.ci_lo = f.slope - 1.96 * f.robust_se;
  f.ci_hi = f.slope + 1.96 * f.robust_se;
  return f;
}

// Fast-rate experiment: for each (n, rep) draw an empirical measure from the
// sampler's finitely supported target and record the compact-mode structural
// upper bound against the target; the log-log slope of the per-n means is
// the quantity under test.
inline rate_report run_rate_experiment(const experiment_config& cfg) {
  cfg.validate();
  const discrete_measure* target = nullptr;
  if (const auto* r = std::get_if<resample_sampler>(&cfg.sampler_spec)) target = &r->base;
  if (const auto* e = std::get_if<exact_base_sampler>(&cfg.sampler_spec)) target = &e->base;
  if (!target)
    throw config_error("rate experiment: sampler target must be finitely supported "
                       "(resample or exact_base)");
  if (target->d() != 1) throw config_error("rate experiment: d = 1 required");
  const double beta = (cfg.beta > 0.0) ? cfg.beta : default_beta(cfg.p, target->T());

  rate_report rep;
  const std::size_t total = cfg.n_grid.size() * static_cast<std::size_t>(cfg.repetitions);
  rep.rows.resize(total);
  parallel_tasks(total, cfg.workers, [&](std::size_t task) {
    const std::size_t gi = task / cfg.repetitions;
    const int rep_i = static_cast<int>(task % cfg.repetitions);
    const std::uint64_t task_seed = derive_seed(cfg.seed, task);
    const discrete_measure emp =
        sample_empirical(cfg.sampler_spec, cfg.n_grid[gi], task_seed);
    const upper_bound_estimate est =
        smooth_aw_upper(*target, emp, cfg.sigma, cfg.p, bound_mode::compact, beta,
                        mc_config{cfg.mc_samples, derive_seed(task_seed, 0x5eedULL)});
    rep.rows[task] = {cfg.n_grid[gi], rep_i, est.structural(), est.standard_error};
  });

  try {
    rep.fit = fit_loglog_slope(rep.rows);
  } catch (const numeric_error&) {
    rep.fit.degenerate = true;  // all-zero estimates: slope undefined
  }
  rep.metadata = {{"config", config_to_json(cfg)}, {"version", library_version},
                  {"estimator", "compact structural upper bound"}};
  return rep;
}

// Exact E|Z_n - 1/2| for Z_n = Binomial(n, 1/2)/n, by direct summation over
// the n+1 outcomes with log-binomial coefficients.
inline double binomial_mean_abs_deviation(std::size_t n) {
  kahan_sum s;
  for (std::size_t k = 0; k <= n; ++k) {
    const double log_pk = std::lgamma(static_cast<double>(n) + 1.0) -
                          std::lgamma(static_cast<double>(k) + 1.0) -
                          std::lgamma(static_cast<double>(n - k) + 1.0) -
                          static_cast<double>(n) * std::log(2.0);
    s.add(std::exp(log_pk) *
          std::fabs(static_cast<double>(k) / static_cast<double>(n) - 0.5));
  }
  return s.value();
}

// Sharpness of the fast rate: the two-point lower bound reduces to
// E|Z_n - 1/2|, computed exactly; its log-log slope is -1/2 up to the
// binomial's subleading terms.
inline rate_report run_sharpness_experiment(const std::vector<std::size_t>& n_grid) {
  if (n_grid.size() < 2) throw config_error("sharpness: n grid needs at least 2 entries");
  rate_report rep;
  for (std::size_t n : n_grid)
    rep.rows.push_back({n, 0, binomial_mean_abs_deviation(n), 0.0});
  rep.fit = fit_loglog_slope(rep.rows);
  rep.metadata = {{"experiment", "sharpness"},
                  {"version", library_version},
                  {"estimator", "exact binomial E|Z_n - 1/2|"}};
  return rep;
}

struct nonconvergence_report {
  rate_report aw;  // AW_1 between independent empirical pairs
  rate_report w;   // W_1 between the same pairs
};

// Empirical non-convergence of AW_1: independent empirical pairs from the
// Gaussian AR sampler keep a non-vanishing adapted distance while plain W_1
// decays at the curse-of-dimensionality rate.
inline nonconvergence_report run_nonconvergence_experiment(const experiment_config& cfg) {
  cfg.validate();
  if (!std::holds_alternative<gaussian_ar_sampler>(cfg.sampler_spec))
    throw config_error("nonconvergence experiment: gaussian_ar sampler required");
  if (cfg.n_grid.back() > cfg.aw_cap_n)
    throw resource_error("nonconvergence experiment: n exceeds the DPP cap " +
                         std::to_string(cfg.aw_cap_n));

  nonconvergence_report out;
  const std::size_t total = cfg.n_grid.size() * static_cast<std::size_t>(cfg.repetitions);
  out.aw.rows.resize(total);
  out.w.rows.resize(total);
  parallel_tasks(total, cfg.workers, [&](std::size_t task) {
    const std::size_t gi = task / cfg.repetitions;
    const int rep_i = static_cast<int>(task % cfg.repetitions);
    const std::size_t n = cfg.n_grid[gi];
    const std::uint64_t task_seed = derive_seed(cfg.seed, task);
    const discrete_measure a =
        sample_empirical(cfg.sampler_spec, n, derive_seed(task_seed, 0));
    const discrete_measure b =
        sample_empirical(cfg.sampler_spec, n, derive_seed(task_seed, 1));
    aw_options opts;
    opts.want_plan = false;
    const double aw = aw_exact(a, b, 1.0, opts).value;
    const double w =
        wasserstein_discrete(a, b, cost_spec(1.0, cost_mode::euclidean_power),
                             /*entry_cap=*/cfg.aw_cap_n * cfg.aw_cap_n + 1)
            .value;
    out.aw.rows[task] = {n, rep_i, aw, 0.0};
    out.w.rows[task] = {n, rep_i, w, 0.0};
  });
  out.aw.fit = fit_loglog_slope(out.aw.rows);
  out.w.fit = fit_loglog_slope(out.w.rows);
  out.aw.metadata = {{"config", config_to_json(cfg)}, {"version", library_version},
                     {"series", "AW_1"}};
  out.w.metadata = {{"config", config_to_json(cfg)}, {"version", library_version},
                    {"series", "W_1"}};
  return out;
}

inline double median_estimate_at(const rate_report& rep, std::size_t n) {
  std::vector<double> vals;
  for (const auto& r : rep.rows)
    if (r.n == n) vals.push_back(r.estimate);
  if (vals.empty()) throw config_error("median_estimate_at: no rows for n");
  std::sort(vals.begin(), vals.end());
  const std::size_t k = vals.size();
  return (k % 2 == 1) ? vals[k / 2] : 0.5 * (vals[k / 2 - 1] + vals[k / 2]);
}

inline void write_rows_csv(std::ostream& out, const std::vector<rate_row>& rows) {
  out << "n,rep,estimate,se\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.rep << ',' << format_double(r.estimate) << ','
        << format_double(r.se) << '\n';
}

inline std::vector<rate_row> read_rows_csv(std::istream& in) {
  std::vector<rate_row> rows;
  std::string line;
  if (!std::getline(in, line)) throw config_error("rows csv: empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rate_row r;
    char comma;
    std::istringstream ls(line);
    if (!(ls >> r.n >> comma >> r.rep >> comma >> r.estimate >> comma >> r.se))
      throw config_error("rows csv: malformed row '" + line + "'");
    rows.push_back(r);
  }
  return rows;
}

// Self-contained log-log SVG: one circle per (n, mean estimate), one fitted
// line element when the fit is non-degenerate, axes drawn as paths.
inline std::string report_svg(const rate_report& rep) {
  std::vector<std::size_t> ns;
  std::vector<double> means, counts;
  for (const auto& r : rep.rows) {
    auto it = std::find(ns.begin(), ns.end(), r.n);
    if (it == ns.end()) {
      ns.push_back(r.n);
      means.push_back(r.estimate);
      counts.push_back(1.0);
    } else {
      means[it - ns.begin()] += r.estimate;
      counts[it - ns.begin()] += 1.0;
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double mean = means[i] / counts[i];
    if (mean > 0.0) {
      lx.push_back(std::log10(static_cast<double>(ns[i])));
      ly.push_back(std::log10(mean));
    }
  }
  if (lx.empty()) throw config_error("report_svg: no positive means to plot");
  auto [xmin_it, xmax_it] = std::minmax_element(lx.begin(), lx.end());
  auto [ymin_it, ymax_it] = std::minmax_element(ly.begin(), ly.end());
  double xmin = *xmin_it, xmax = *xmax_it, ymin = *ymin_it, ymax = *ymax_it;
  if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
  const double W = 640, H = 480, ml = 60, mr = 20, mt = 20, mb = 40;
  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  svg << "<path d=\"M " << ml << ' ' << mt << " L " << ml << ' ' << (H - mb) << " L "
      << (W - mr) << ' ' << (H - mb) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 8)
      << "\" text-anchor=\"middle\" font-size=\"14\">log10 n</text>\n";
  svg << "<text x=\"14\" y=\"" << (H / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 14 "
      << (H / 2) << ")\">log10 mean estimate</text>\n";
  if (!rep.fit.degenerate) {
    const double lf = std::log10(std::exp(1.0));
    auto fit_y = [&](double logx) {
      // fit is in natural logs; convert both axes to log10
      const double lnx = logx / lf;
      return (rep.fit.intercept + rep.fit.slope * lnx) * lf;
    };
    svg << "<line class=\"fit\" x1=\"" << X(xmin) << "\" y1=\"" << Y(fit_y(xmin))
        << "\" x2=\"" << X(xmax) << "\" y2=\"" << Y(fit_y(xmax))
        << "\" stroke=\"crimson\" stroke-width=\"1.5\"/>\n";
  }
  for (std::size_t i = 0; i < lx.size(); ++i)
    svg << "<circle class=\"pt\" cx=\"" << X(lx[i]) << "\" cy=\"" << Y(ly[i])
        << "\" r=\"4\" fill=\"steelblue\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

enum class report_format { csv, json, svg };

inline std::vector<std::string> emit_report(const rate_report& rep,
                                            const std::vector<report_format>& formats,
                                            const std::string& out_dir,
                                            const std::string& basename) {
  if (rep.rows.empty()) throw config_error("emit_report: no rows");
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  for (report_format f : formats) {
    fs::path path = fs::path(out_dir) / basename;
    if (f == report_format::csv) {
      path += ".csv";
      std::ofstream out(path);
      if (!out) throw config_error("emit_report: cannot open " + path.string());
      write_rows_csv(out, rep.rows);
    } else if (f == report_format::json) {
      path += ".json";
      std::ofstream out(path);
      if (!out) throw config_error("emit_report: cannot open " + path.string());
      nlohmann::json j = {{"metadata", rep.metadata},
                          {"fit",
                           {{"slope", rep.fit.slope},
                            {"intercept", rep.fit.intercept},
                            {"ci", {rep.fit.ci_lo, rep.fit.ci_hi}},
                            {"robust_se", rep.fit.robust_se},
                            {"degenerate", rep.fit.degenerate}}}};
      out << j.dump(2) << "\n";
    } else {
      path += ".svg";
      std::ofstream out(path);
      if (!out) throw config_error("emit_report: cannot open " + path.string());
      out << report_svg(rep);
    }
    written.push_back(path.string());
  }
  return written;
}

}  // namespace pathot
