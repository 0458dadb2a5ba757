#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <unordered_map>
#include <vector>

#include "pathot/measure.hpp"

namespace pathot {

// Prefix tree of a path measure. Prefixes are grouped by exact bitwise
// equality of their coordinates: empirical samples from continuous laws stay
// distinct, and discrete inputs group exactly as written. No epsilon
// clustering (that would silently change the measure).
struct history_node {
  int parent = -1;
  std::size_t rep_atom = 0;   // any atom whose prefix lands in this node
  double weight = 0.0;        // total mass under the prefix
  double cond_weight = 1.0;   // weight / parent weight
  std::vector<int> children;  // node ids at the next level
};

class history_tree {
 public:
  explicit history_tree(const discrete_measure& m) : m_(&m) {
    const int T = m.T(), d = m.d();
    levels_.resize(T + 1);
    atom_node_.assign(T + 1, std::vector<int>(m.size(), 0));
    levels_[0].push_back(history_node{-1, 0, 1.0, 1.0, {}});

    struct key_hash {
      std::size_t operator()(const std::vector<std::uint64_t>& k) const {
        std::size_t h = 1469598103934665603ULL;
        for (std::uint64_t v : k) {
          h ^= v;
          h *= 1099511628211ULL;
        }
        return h;
      }
    };

    for (int t = 1; t <= T; ++t) {
      std::unordered_map<std::vector<std::uint64_t>, int, key_hash> index;
      index.reserve(m.size() * 2);
      std::vector<std::uint64_t> key(1 + d);
      for (std::size_t j = 0; j < m.size(); ++j) {
        const int parent = atom_node_[t - 1][j];
        key[0] = static_cast<std::uint64_t>(parent);
        const auto step = m.atom_step(j, t - 1);
        for (int c = 0; c < d; ++c) key[1 + c] = std::bit_cast<std::uint64_t>(step[c]);
        auto [it, inserted] = index.emplace(key, static_cast<int>(levels_[t].size()));
        if (inserted) {
          levels_[t].push_back(history_node{parent, j, 0.0, 0.0, {}});
          levels_[t - 1][parent].children.push_back(it->second);
        }
        levels_[t][it->second].weight += m.weight(j);
        atom_node_[t][j] = it->second;
      }
      for (auto& node : levels_[t])
        node.cond_weight = node.weight / levels_[t - 1][node.parent].weight;
    }
  }

  const discrete_measure& measure() const { return *m_; }
  int T() const { return m_->T(); }
  std::span<const history_node> level(int t) const { return levels_[t]; }
  std::size_t level_size(int t) const { return levels_[t].size(); }

  // Node containing atom j's prefix x_{1:t}.
  int node_of(int t, std::size_t atom) const { return atom_node_[t][atom]; }

  // Step value x_{t+1} of a node at level t+1 (0-based step index t).
  std::span<const double> node_step(int t_next, int node) const {
    return m_->atom_step(levels_[t_next][node].rep_atom, t_next - 1);
  }

 private:
  const discrete_measure* m_;
  std::vector<std::vector<history_node>> levels_;    // levels_[t], t = 0..T
  std::vector<std::vector<int>> atom_node_;          // [t][atom] -> node id
};

inline history_tree build_history_tree(const discrete_measure& m) {
  return history_tree(m);
}

}  // namespace pathot
