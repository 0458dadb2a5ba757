#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "pathot/errors.hpp"
#include "pathot/history_tree.hpp"
#include "pathot/measure.hpp"
#include "pathot/measure_io.hpp"
#include "pathot/network_simplex.hpp"

namespace pathot {

struct causality_report {
  double marginal_residual = 0.0;
  double causal_residual_x = 0.0;  // (Y_{1:t} independent of X_{t+1}) given X_{1:t}
  double causal_residual_y = 0.0;
  bool pass(double marginal_tol = 1e-9, double causal_tol = 1e-8) const {
    return marginal_residual <= marginal_tol && causal_residual_x <= causal_tol &&
           causal_residual_y <= causal_tol;
  }
};

struct bicausal_plan {
  std::vector<transport_entry> entries;  // (atom of mu, atom of nu, mass)
  std::size_t rows = 0, cols = 0;
  causality_report residuals;

  void export_csv(std::ostream& out) const {
    out << "path_index_mu,path_index_nu,mass\n";
    for (const auto& e : entries)
      out << e.i << ',' << e.j << ',' << format_double(e.mass) << '\n';
  }
};

struct aw_result {
  double value = 0.0;
  bicausal_plan plan;
};

struct aw_options {
  std::size_t node_pair_cap = 8000000;  // sum over levels of node-pair counts
  bool want_plan = true;
};

namespace detail {

// One-step coupling cost |x_{t+1} - y_{t+1}|^p plus the continuation value.
inline double stage_cost(std::span<const double> x, std::span<const double> y, double p) {
  return std::pow(std::sqrt(sq_dist(x, y)), p);
}

}  // namespace detail

// Exact adapted Wasserstein distance via the backward recursion
//   V_T = 0,
//   V_t(u, w) = inf over couplings of the one-step kernels of
//               |x_{t+1}-y_{t+1}|^p + V_{t+1},
// evaluated on the distinct-prefix nodes of the two history trees;
// AW_p = V_0^{1/p}. Node-pair subproblems are transportation LPs.
inline aw_result aw_exact(const discrete_measure& mu, const discrete_measure& nu,
                          double p, const aw_options& opts = {}) {
  if (mu.T() != nu.T() || mu.d() != nu.d())
    throw config_error("aw_exact: mismatched (T,d)");
  if (!(p >= 1.0)) throw config_error("aw_exact: p must be >= 1");
  const int T = mu.T();

  const history_tree A(mu), B(nu);
  std::size_t pair_total = 0;
  for (int t = 1; t < T; ++t) pair_total += A.level_size(t) * B.level_size(t);
  if (pair_total > opts.node_pair_cap)
    throw resource_error("aw_exact: node-pair cap exceeded");

  // stage_plans[t] holds, per node pair at level t, the optimal one-step
  // coupling over (child of u, child of w) conditional weights.
  std::vector<std::vector<std::vector<transport_entry>>> stage_plans;
  if (opts.want_plan) stage_plans.resize(T);

  std::vector<double> v_next;  // V_{t+1} over node pairs, empty means zero
  std::vector<double> v_cur;
  std::vector<double> ca, cb, cost;
  for (int t = T - 1; t >= 0; --t) {
    const auto ul = A.level(t);
    const auto wl = B.level(t);
    const std::size_t nb_next = B.level_size(t + 1);
    v_cur.assign(ul.size() * wl.size(), 0.0);
    if (opts.want_plan) stage_plans[t].resize(ul.size() * wl.size());
    for (std::size_t ui = 0; ui < ul.size(); ++ui) {
      const auto& u = ul[ui];
      for (std::size_t wi = 0; wi < wl.size(); ++wi) {
        const auto& w = wl[wi];
        const std::size_t na = u.children.size(), nb = w.children.size();
        cost.resize(na * nb);
        for (std::size_t a = 0; a < na; ++a) {
          const int ac = u.children[a];
          const auto xa = A.node_step(t + 1, ac);
          for (std::size_t b = 0; b < nb; ++b) {
            const int bc = w.children[b];
            double c = detail::stage_cost(xa, B.node_step(t + 1, bc), p);
            if (!v_next.empty()) c += v_next[static_cast<std::size_t>(ac) * nb_next + bc];
            cost[a * nb + b] = c;
          }
        }
        double value;
        std::vector<transport_entry> plan;
        if (na == 1 || nb == 1) {
          // Coupling forced: product of the conditional weights.
          value = 0.0;
          for (std::size_t a = 0; a < na; ++a)
            for (std::size_t b = 0; b < nb; ++b) {
              const double mass = A.level(t + 1)[u.children[a]].cond_weight *
                                  B.level(t + 1)[w.children[b]].cond_weight;
              value += mass * cost[a * nb + b];
              if (opts.want_plan)
                plan.push_back({static_cast<int>(a), static_cast<int>(b), mass});
            }
        } else {
          ca.resize(na);
          cb.resize(nb);
          for (std::size_t a = 0; a < na; ++a)
            ca[a] = A.level(t + 1)[u.children[a]].cond_weight;
          for (std::size_t b = 0; b < nb; ++b)
            cb[b] = B.level(t + 1)[w.children[b]].cond_weight;
          transport_result r = solve_transport(ca, cb, cost);
          value = r.objective;
          if (opts.want_plan) plan = std::move(r.plan);
        }
        v_cur[ui * wl.size() + wi] = value;
        if (opts.want_plan) stage_plans[t][ui * wl.size() + wi] = std::move(plan);
      }
    }
    v_next = std::move(v_cur);
  }

  aw_result out;
  out.value = std::pow(std::max(0.0, v_next[0]), 1.0 / p);
  if (!opts.want_plan) return out;

  // Forward pass: push mass through the stagewise optimal kernels, then
  // spread each leaf-pair mass over the atoms sharing the leaf path.
  std::vector<double> pair_mass(1, 1.0);
  for (int t = 0; t < T; ++t) {
    const auto ul = A.level(t);
    const auto wl = B.level(t);
    std::vector<double> next_mass(A.level_size(t + 1) * B.level_size(t + 1), 0.0);
    for (std::size_t ui = 0; ui < ul.size(); ++ui)
      for (std::size_t wi = 0; wi < wl.size(); ++wi) {
        const double q = pair_mass[ui * wl.size() + wi];
        if (q <= 0.0) continue;
        for (const auto& e : stage_plans[t][ui * wl.size() + wi]) {
          const int ac = ul[ui].children[e.i];
          const int bc = wl[wi].children[e.j];
          next_mass[static_cast<std::size_t>(ac) * B.level_size(t + 1) + bc] += q * e.mass;
        }
      }
    pair_mass = std::move(next_mass);
  }

  std::vector<std::vector<std::size_t>> leaf_atoms_a(A.level_size(T)),
      leaf_atoms_b(B.level_size(T));
  for (std::size_t i = 0; i < mu.size(); ++i) leaf_atoms_a[A.node_of(T, i)].push_back(i);
  for (std::size_t j = 0; j < nu.size(); ++j) leaf_atoms_b[B.node_of(T, j)].push_back(j);

  out.plan.rows = mu.size();
  out.plan.cols = nu.size();
  for (std::size_t ui = 0; ui < A.level_size(T); ++ui)
    for (std::size_t wi = 0; wi < B.level_size(T); ++wi) {
      const double q = pair_mass[ui * B.level_size(T) + wi];
      if (q <= 0.0) continue;
      const double wa = A.level(T)[ui].weight, wb = B.level(T)[wi].weight;
      for (std::size_t i : leaf_atoms_a[ui])
        for (std::size_t j : leaf_atoms_b[wi])
          out.plan.entries.push_back({static_cast<int>(i), static_cast<int>(j),
                                      q * (mu.weight(i) / wa) * (nu.weight(j) / wb)});
    }
  return out;
}

// Residuals of the linear bicausality constraints. For each t, grouping by
// the trees' distinct prefixes, a bicausal plan satisfies
//   pi[x_{1:t+1}, y_{1:t}] = K_mu(x_{t+1} | x_{1:t}) * pi[x_{1:t}, y_{1:t}]
// and symmetrically in the other direction.
inline causality_report verify_bicausal(const bicausal_plan& plan,
                                        const discrete_measure& mu,
                                        const discrete_measure& nu) {
  const history_tree A(mu), B(nu);
  const int T = mu.T();

  causality_report rep;
  {
    std::vector<double> row(mu.size(), 0.0), col(nu.size(), 0.0);
    for (const auto& e : plan.entries) {
      row[e.i] += e.mass;
      col[e.j] += e.mass;
      if (e.mass < -1e-12) rep.marginal_residual = std::max(rep.marginal_residual, -e.mass);
    }
    for (std::size_t i = 0; i < mu.size(); ++i)
      rep.marginal_residual = std::max(rep.marginal_residual, std::fabs(row[i] - mu.weight(i)));
    for (std::size_t j = 0; j < nu.size(); ++j)
      rep.marginal_residual = std::max(rep.marginal_residual, std::fabs(col[j] - nu.weight(j)));
  }

  auto side_residual = [&](const history_tree& F, const history_tree& G, bool x_side) {
    double res = 0.0;
    for (int t = 1; t < T; ++t) {
      std::vector<double> fine(F.level_size(t + 1) * G.level_size(t), 0.0);
      std::vector<double> coarse(F.level_size(t) * G.level_size(t), 0.0);
      for (const auto& e : plan.entries) {
        const std::size_t i = x_side ? e.i : e.j;
        const std::size_t j = x_side ? e.j : e.i;
        const int a_next = F.node_of(t + 1, i);
        const int a_cur = F.node_of(t, i);
        const int b_cur = G.node_of(t, j);
        fine[static_cast<std::size_t>(a_next) * G.level_size(t) + b_cur] += e.mass;
        coarse[static_cast<std::size_t>(a_cur) * G.level_size(t) + b_cur] += e.mass;
      }
      for (std::size_t a = 0; a < F.level_size(t + 1); ++a) {
        const auto& node = F.level(t + 1)[a];
        for (std::size_t b = 0; b < G.level_size(t); ++b) {
          const double lhs = fine[a * G.level_size(t) + b];
          const double rhs =
              node.cond_weight *
              coarse[static_cast<std::size_t>(node.parent) * G.level_size(t) + b];
          res = std::max(res, std::fabs(lhs - rhs));
        }
      }
    }
    return res;
  };
  rep.causal_residual_x = side_residual(A, B, true);
  rep.causal_residual_y = side_residual(B, A, false);
  return rep;
}

}  // namespace pathot
