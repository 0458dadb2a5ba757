#pragma once

#include <cmath>
#include <vector>

#include "pathot/measure.hpp"
#include "pathot/rng.hpp"

namespace test_helpers {

using pathot::discrete_measure;

// mu = 1/2 (delta_{(0,1)} + delta_{(0,-1)}), the branching two-point measure.
inline discrete_measure branching_pair() {
  return discrete_measure(2, 1, {0.0, 1.0, 0.0, -1.0}, {0.5, 0.5});
}

// mu_eps = 1/2 (delta_{(eps,1)} + delta_{(-eps,-1)}), its anticipative kin.
inline discrete_measure shifted_pair(double eps) {
  return discrete_measure(2, 1, {eps, 1.0, -eps, -1.0}, {0.5, 0.5});
}

// Two atoms with distinct first coordinates, so the smoothed kernel map
// genuinely varies with the prefix.
inline discrete_measure two_branch_pair() {
  return discrete_measure(2, 1, {-1.0, 1.0, 1.0, -1.0}, {0.5, 0.5});
}

inline discrete_measure point_mass(std::vector<double> entries, int T, int d) {
  return discrete_measure(T, d, std::move(entries), {1.0});
}

// Random measure with coordinates on a small integer grid, so prefixes
// collide and the history trees actually branch.
inline discrete_measure random_grid_measure(pathot::counter_rng& rng, int T, int d,
                                            int max_atoms) {
  const int n = 2 + static_cast<int>(rng.uniform() * (max_atoms - 1));
  std::vector<double> flat;
  std::vector<double> w;
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < T * d; ++c)
      flat.push_back(static_cast<double>(static_cast<int>(rng.uniform() * 3.0) - 1));
    w.push_back(0.1 + rng.uniform());
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return discrete_measure(T, d, std::move(flat), std::move(w));
}

// Random measure with continuous coordinates (a.s. distinct prefixes).
inline discrete_measure random_continuous_measure(pathot::counter_rng& rng, int T, int d,
                                                  int max_atoms, double scale = 1.0) {
  const int n = 2 + static_cast<int>(rng.uniform() * (max_atoms - 1));
  std::vector<double> flat;
  std::vector<double> w;
  for (int j = 0; j < n; ++j) {
    for (int c = 0; c < T * d; ++c) flat.push_back(scale * rng.normal());
    w.push_back(0.1 + rng.uniform());
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return discrete_measure(T, d, std::move(flat), std::move(w));
}

}  // namespace test_helpers
