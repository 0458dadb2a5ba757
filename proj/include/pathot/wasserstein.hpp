#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "pathot/errors.hpp"
#include "pathot/measure.hpp"
#include "pathot/measure_io.hpp"
#include "pathot/network_simplex.hpp"

namespace pathot {

enum class cost_mode {
  euclidean_power,  // |x - y|^p with the l2 norm on the whole path
  per_step_sum,     // sum_t |x_t - y_t|^p
};

struct cost_spec {
  double p = 2.0;
  cost_mode mode = cost_mode::euclidean_power;

  cost_spec() = default;
  cost_spec(double p_, cost_mode mode_) : p(p_), mode(mode_) {
    if (!(p >= 1.0)) throw config_error("cost_spec: p must be >= 1");
  }
};

inline double path_cost(std::span<const double> x, std::span<const double> y, int d,
                        const cost_spec& c) {
  if (c.mode == cost_mode::euclidean_power)
    return std::pow(std::sqrt(sq_dist(x, y)), c.p);
  double s = 0.0;
  const int T = static_cast<int>(x.size()) / d;
  for (int t = 0; t < T; ++t) {
    const std::size_t off = static_cast<std::size_t>(t) * d;
    s += std::pow(std::sqrt(sq_dist(x.subspan(off, d), y.subspan(off, d))), c.p);
  }
  return s;
}

struct transport_plan {
  std::vector<transport_entry> entries;
  std::size_t rows = 0, cols = 0;
  double objective = 0.0;          // sum plan * cost
  double marginal_residual = 0.0;  // max-norm violation of the marginals

  void export_csv(std::ostream& out) const {
    out << "i,j,mass\n";
    for (const auto& e : entries)
      out << e.i << ',' << e.j << ',' << format_double(e.mass) << '\n';
  }
};

inline constexpr std::size_t default_cost_entry_cap = 4000000;

struct wasserstein_result {
  double value = 0.0;  // (optimal objective)^{1/p}
  transport_plan plan;
};

namespace detail {

inline double plan_marginal_residual(const std::vector<transport_entry>& entries,
                                     std::span<const double> a,
                                     std::span<const double> b) {
  std::vector<double> row(a.size(), 0.0), col(b.size(), 0.0);
  for (const auto& e : entries) {
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  double res = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) res = std::max(res, std::fabs(row[i] - a[i]));
  for (std::size_t j = 0; j < b.size(); ++j) res = std::max(res, std::fabs(col[j] - b[j]));
  return res;
}

}  // namespace detail

// Exact W_p between finitely supported measures via the transportation LP.
inline wasserstein_result wasserstein_discrete(
    const discrete_measure& mu, const discrete_measure& nu, const cost_spec& cost,
    std::size_t entry_cap = default_cost_entry_cap) {
  if (mu.T() != nu.T() || mu.d() != nu.d())
    throw config_error("wasserstein_discrete: mismatched (T,d)");
  const std::size_t n = mu.size(), m = nu.size();
  if (n * m > entry_cap)
    throw resource_error("wasserstein_discrete: cost matrix exceeds entry cap");

  std::vector<double> c(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = mu.atom(i);
    for (std::size_t j = 0; j < m; ++j)
      c[i * m + j] = path_cost(xi, nu.atom(j), mu.d(), cost);
  }
  transport_result r = solve_transport(mu.weights(), nu.weights(), c);

  wasserstein_result out;
  out.plan.entries = std::move(r.plan);
  out.plan.rows = n;
  out.plan.cols = m;
  out.plan.objective = r.objective;
  out.plan.marginal_residual =
      detail::plan_marginal_residual(out.plan.entries, mu.weights(), nu.weights());
  out.value = std::pow(std::max(0.0, r.objective), 1.0 / cost.p);
  return out;
}

// W_p on the line by integrating |F_mu^{-1} - F_nu^{-1}|^p over the merged
// weight partition of the two sorted atom lists. Exact for discrete inputs.
inline double wasserstein_1d_quantile(const discrete_measure& mu,
                                      const discrete_measure& nu, double p) {
  if (mu.dim() != 1 || nu.dim() != 1)
    throw config_error("wasserstein_1d_quantile: both measures must have T*d = 1");
  if (!(p >= 1.0)) throw config_error("wasserstein_1d_quantile: p must be >= 1");

  auto sorted = [](const discrete_measure& m) {
    std::vector<std::pair<double, double>> a(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) a[j] = {m.atom(j)[0], m.weight(j)};
    std::sort(a.begin(), a.end());
    return a;
  };
  const auto xs = sorted(mu), ys = sorted(nu);

  kahan_sum acc;
  std::size_t i = 0, j = 0;
  double ri = xs[0].second, rj = ys[0].second;
  while (i < xs.size() && j < ys.size()) {
    const double step = std::min(ri, rj);
    acc.add(step * std::pow(std::fabs(xs[i].first - ys[j].first), p));
    ri -= step;
    rj -= step;
    if (ri <= 0.0 && i + 1 < xs.size()) ri = xs[++i].second;
    else if (ri <= 0.0) ri = std::numeric_limits<double>::infinity(), ++i;
    if (rj <= 0.0 && j + 1 < ys.size()) rj = ys[++j].second;
    else if (rj <= 0.0) rj = std::numeric_limits<double>::infinity(), ++j;
  }
  return std::pow(std::max(0.0, acc.value()), 1.0 / p);
}

// Independent convolution of two discrete measures by atom expansion.
inline discrete_measure convolve_discrete(const discrete_measure& mu,
                                          const discrete_measure& eta) {
  if (mu.T() != eta.T() || mu.d() != eta.d())
    throw config_error("convolve_discrete: mismatched (T,d)");
  const std::size_t dim = mu.dim();
  std::vector<double> flat;
  std::vector<double> w;
  flat.reserve(mu.size() * eta.size() * dim);
  w.reserve(mu.size() * eta.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.atom(i);
    for (std::size_t k = 0; k < eta.size(); ++k) {
      const auto e = eta.atom(k);
      for (std::size_t c = 0; c < dim; ++c) flat.push_back(x[c] + e[c]);
      w.push_back(mu.weight(i) * eta.weight(k));
    }
  }
  return discrete_measure(mu.T(), mu.d(), std::move(flat), std::move(w));
}

}  // namespace pathot
