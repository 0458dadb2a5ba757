#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pathot/adapted.hpp"
#include "pathot/dense_lp.hpp"
#include "pathot/errors.hpp"
#include "pathot/history_tree.hpp"
#include "pathot/measure.hpp"

namespace pathot {

// Independent oracle for aw_exact: one LP over joint couplings with the
// marginal constraints plus the linear bicausality constraints in both
// directions (conditional independence is linear in pi once the marginals
// are fixed). Restricted to oracle-sized instances.
inline double aw_bruteforce_lp(const discrete_measure& mu, const discrete_measure& nu,
                               double p, std::size_t max_atoms = 6) {
  if (mu.T() != nu.T() || mu.d() != nu.d())
    throw config_error("aw_bruteforce_lp: mismatched (T,d)");
  if (mu.T() < 2 || mu.T() > 3)
    throw resource_error("aw_bruteforce_lp: only T in {2,3}");
  if (mu.size() > max_atoms || nu.size() > max_atoms)
    throw resource_error("aw_bruteforce_lp: instance too large");
  if (!(p >= 1.0)) throw config_error("aw_bruteforce_lp: p must be >= 1");

  const std::size_t n = mu.size(), m = nu.size();
  const std::size_t nv = n * m;
  const int T = mu.T();
  const history_tree A(mu), B(nu);

  std::vector<double> cost(nv);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double c = 0.0;
      for (int t = 0; t < T; ++t)
        c += std::pow(std::sqrt(sq_dist(mu.atom_step(i, t), nu.atom_step(j, t))), p);
      cost[i * m + j] = c;
    }

  std::vector<double> rows;
  std::vector<double> rhs;
  auto add_row = [&](const std::vector<double>& row, double b) {
    rows.insert(rows.end(), row.begin(), row.end());
    rhs.push_back(b);
  };

  std::vector<double> row(nv);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j < m; ++j) row[i * m + j] = 1.0;
    add_row(row, mu.weight(i));
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) row[i * m + j] = 1.0;
    add_row(row, nu.weight(j));
  }

  // Causality of F against G: pi[prefix_{t+1}(F), prefix_t(G)] equals the F
  // kernel times pi[prefix_t(F), prefix_t(G)]. Only-child nodes give 0 = 0.
  auto add_causality = [&](const history_tree& F, const history_tree& G, bool f_is_mu) {
    for (int t = 1; t < T; ++t) {
      for (std::size_t a = 0; a < F.level_size(t + 1); ++a) {
        const auto& node = F.level(t + 1)[a];
        if (F.level(t)[node.parent].children.size() == 1) continue;
        for (std::size_t b = 0; b < G.level_size(t); ++b) {
          std::fill(row.begin(), row.end(), 0.0);
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) {
              const std::size_t fi = f_is_mu ? i : j;
              const std::size_t gj = f_is_mu ? j : i;
              if (G.node_of(t, gj) != static_cast<int>(b)) continue;
              double coef = 0.0;
              if (F.node_of(t + 1, fi) == static_cast<int>(a)) coef += 1.0;
              if (F.node_of(t, fi) == node.parent) coef -= node.cond_weight;
              if (coef != 0.0) row[i * m + j] = coef;
            }
          add_row(row, 0.0);
        }
      }
    }
  };
  add_causality(A, B, true);
  add_causality(B, A, false);

  dense_lp lp;
  const double value = lp.solve(std::move(rows), std::move(rhs), cost);
  return std::pow(std::max(0.0, value), 1.0 / p);
}

}  // namespace pathot
