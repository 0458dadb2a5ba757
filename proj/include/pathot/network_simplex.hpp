#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "pathot/errors.hpp"

namespace pathot {

struct transport_entry {
  int i = 0;
  int j = 0;
  double mass = 0.0;
};

struct transport_result {
  double objective = 0.0;
  std::vector<transport_entry> plan;
};

// Primal network simplex specialized to the dense balanced transportation
// problem: m sources, n sinks, arcs (i,j) with cost c[i*n+j]. The basis is a
// spanning tree over the bipartite graph, seeded by the north-west-corner
// rule (no artificial arcs, so potentials stay at cost scale). Entering arcs
// are chosen by block search over the most negative reduced cost.
class transport_simplex {
 public:
  // Relative pivot tolerance on reduced costs.
  static constexpr double pivot_tolerance = 1e-12;

  transport_result solve(std::span<const double> supply,
                         std::span<const double> demand,
                         std::span<const double> cost) {
    m_ = static_cast<int>(supply.size());
    n_ = static_cast<int>(demand.size());
    if (m_ < 1 || n_ < 1) throw config_error("transport_simplex: empty marginal");
    if (cost.size() != static_cast<std::size_t>(m_) * n_)
      throw config_error("transport_simplex: cost matrix shape mismatch");
    cost_ = cost;
    const int N = m_ + n_;

    parent_.assign(N, -1);
    pred_arc_.assign(N, -1);
    pred_src_.assign(N, false);
    flow_.assign(N, 0.0);
    pi_.assign(N, 0.0);
    depth_.assign(N, 0);
    children_.assign(N, {});
    child_pos_.assign(N, 0);

    init_northwest(supply, demand);

    double max_abs_cost = 0.0;
    for (double c : cost_) max_abs_cost = std::max(max_abs_cost, std::fabs(c));
    const double eps = pivot_tolerance * std::max(1.0, max_abs_cost);

    const long long num_arcs = static_cast<long long>(m_) * n_;
    const int block = std::max(64, static_cast<int>(std::sqrt(static_cast<double>(num_arcs))));
    const long long pivot_cap = 2000000 + 50LL * N;

    long long pivots = 0;
    long long next_arc = 0;
    while (true) {
      int best = -1;
      double best_rc = -eps;
      long long scanned = 0;
      while (scanned < num_arcs) {
        const long long stop = std::min(num_arcs, scanned + block);
        for (; scanned < stop; ++scanned) {
          const long long a = next_arc;
          next_arc = (next_arc + 1 == num_arcs) ? 0 : next_arc + 1;
          const int i = static_cast<int>(a / n_);
          const int j = static_cast<int>(a % n_);
          const double rc = cost_[a] - pi_[i] + pi_[m_ + j];
          if (rc < best_rc) {
            best_rc = rc;
            best = static_cast<int>(a);
          }
        }
        if (best >= 0) break;
      }
      if (best < 0) break;
      pivot(best);
      if (++pivots > pivot_cap)
        throw resource_error("transport_simplex: pivot cap exceeded");
    }

    transport_result out;
    double obj = 0.0, comp = 0.0;
    for (int v = 0; v < N; ++v) {
      if (pred_arc_[v] < 0) continue;
      const int a = pred_arc_[v];
      if (flow_[v] > 0.0) {
        out.plan.push_back({a / n_, a % n_, flow_[v]});
        const double term = flow_[v] * cost_[a] - comp;
        const double t = obj + term;
        comp = (t - obj) - term;
        obj = t;
      }
    }
    out.objective = obj;
    return out;
  }

 private:
  void link(int child, int par) {
    parent_[child] = par;
    child_pos_[child] = static_cast<int>(children_[par].size());
    children_[par].push_back(child);
  }

  void unlink(int child) {
    const int par = parent_[child];
    auto& list = children_[par];
    const int pos = child_pos_[child];
    list[pos] = list.back();
    child_pos_[list[pos]] = pos;
    list.pop_back();
    parent_[child] = -1;
  }

  void init_northwest(std::span<const double> supply, std::span<const double> demand) {
    int i = 0, j = 0;
    double ra = supply[0], rb = demand[0];
    struct basic_arc {
      int i, j;
      double f;
    };
    std::vector<basic_arc> arcs;
    arcs.reserve(m_ + n_ - 1);
    while (true) {
      arcs.push_back({i, j, std::max(0.0, std::min(ra, rb))});
      if (i == m_ - 1 && j == n_ - 1) break;
      bool advance_source = ra <= rb;
      if (i == m_ - 1) advance_source = false;
      if (j == n_ - 1) advance_source = true;
      if (advance_source) {
        rb = std::max(0.0, rb - ra);
        ra = supply[++i];
      } else {
        ra = std::max(0.0, ra - rb);
        rb = demand[++j];
      }
    }

    // Turn the chain of basic arcs into rooted-tree arrays. The chain visits
    // nodes in interleaved order, so each new arc attaches one new node.
    std::vector<bool> seen(m_ + n_, false);
    seen[0] = true;
    parent_[0] = -1;
    pi_[0] = 0.0;
    depth_[0] = 0;
    for (const auto& a : arcs) {
      const int s = a.i, t = m_ + a.j;
      const int arc_id = a.i * n_ + a.j;
      int child, par;
      if (!seen[t]) {
        child = t;
        par = s;
      } else {
        child = s;
        par = t;
      }
      seen[child] = true;
      link(child, par);
      pred_arc_[child] = arc_id;
      pred_src_[child] = (child == s);
      flow_[child] = a.f;
      depth_[child] = depth_[par] + 1;
      pi_[child] = pred_src_[child] ? pi_[par] + cost_[arc_id] : pi_[par] - cost_[arc_id];
    }
  }

  void pivot(int enter_arc) {
    const int src = enter_arc / n_;
    const int snk = m_ + enter_arc % n_;

    int u = src, v = snk;
    while (u != v) {
      if (depth_[u] >= depth_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    const int lca = u;

    // The cycle is the entering arc src->snk plus the tree path snk..lca..src.
    // Walking up from snk, traversal agrees with an arc oriented child->parent;
    // walking up from src it is the other way around.
    double delta = std::numeric_limits<double>::infinity();
    int leave_node = -1;
    bool leave_on_src_side = false;
    for (int w = snk; w != lca; w = parent_[w]) {
      if (pred_src_[w]) continue;  // flow increases on this arc
      if (flow_[w] < delta) {
        delta = flow_[w];
        leave_node = w;
        leave_on_src_side = false;
      }
    }
    for (int w = src; w != lca; w = parent_[w]) {
      if (!pred_src_[w]) continue;
      if (flow_[w] <= delta) {  // prefer the source side on ties (arbitrary, deterministic)
        delta = flow_[w];
        leave_node = w;
        leave_on_src_side = true;
      }
    }
    if (leave_node < 0)
      throw numeric_error("transport_simplex: unbounded pivot (invalid marginals)");

    for (int w = snk; w != lca; w = parent_[w]) flow_[w] += pred_src_[w] ? delta : -delta;
    for (int w = src; w != lca; w = parent_[w]) flow_[w] += pred_src_[w] ? -delta : delta;

    // Re-root the detached subtree at the entering arc's endpoint inside it,
    // reversing parent pointers from that endpoint up to the leaving arc.
    const int attach_root = leave_on_src_side ? src : snk;
    const int anchor = leave_on_src_side ? snk : src;

    int cur = attach_root;
    int carried_parent = anchor;
    int carried_arc = enter_arc;
    bool carried_src = (attach_root == src);
    double carried_flow = delta;
    while (true) {
      const int old_parent = parent_[cur];
      const int old_arc = pred_arc_[cur];
      const bool old_src = pred_src_[cur];
      const double old_flow = flow_[cur];
      const bool done = (cur == leave_node);
      if (parent_[cur] >= 0) unlink(cur);
      link(cur, carried_parent);
      pred_arc_[cur] = carried_arc;
      pred_src_[cur] = carried_src;
      flow_[cur] = carried_flow;
      if (done) break;
      carried_parent = cur;
      carried_arc = old_arc;
      carried_src = !old_src;
      carried_flow = old_flow;
      cur = old_parent;
    }

    // Potentials and depths are stale exactly on the re-attached subtree.
    stack_.clear();
    stack_.push_back(attach_root);
    while (!stack_.empty()) {
      const int w = stack_.back();
      stack_.pop_back();
      const int p = parent_[w];
      depth_[w] = depth_[p] + 1;
      pi_[w] = pred_src_[w] ? pi_[p] + cost_[pred_arc_[w]] : pi_[p] - cost_[pred_arc_[w]];
      for (int c : children_[w]) stack_.push_back(c);
    }
  }

  int m_ = 0, n_ = 0;
  std::span<const double> cost_;
  std::vector<int> parent_;
  std::vector<int> pred_arc_;
  std::vector<bool> pred_src_;  // true when the node is the arc's source side
  std::vector<double> flow_;    // flow on the arc to the parent
  std::vector<double> pi_;
  std::vector<int> depth_;
  std::vector<std::vector<int>> children_;
  std::vector<int> child_pos_;
  std::vector<int> stack_;
};

inline transport_result solve_transport(std::span<const double> supply,
                                        std::span<const double> demand,
                                        std::span<const double> cost) {
  transport_simplex solver;
  return solver.solve(supply, demand, cost);
}

}  // namespace pathot
