#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pathot/errors.hpp"

namespace pathot {

// Dense two-phase primal simplex for small equality-form LPs:
//   min c'x  s.t.  A x = b, x >= 0.
// Bland's rule throughout, so degenerate (and redundant) constraint systems
// terminate. Intended for oracle-sized problems, not production solves.
class dense_lp {
 public:
  static constexpr double tol = 1e-11;

  // rows: m x n constraint matrix (row-major), rhs: length m, cost: length n.
  double solve(std::vector<double> a, std::vector<double> b, const std::vector<double>& c,
               std::vector<double>* solution = nullptr) {
    m_ = b.size();
    n_ = c.size();
    if (a.size() != m_ * n_) throw config_error("dense_lp: shape mismatch");

    // Tableau columns: n structural + m artificial + rhs.
    width_ = n_ + m_ + 1;
    tab_.assign(m_ * width_, 0.0);
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const double sign = (b[r] < 0.0) ? -1.0 : 1.0;
      for (std::size_t k = 0; k < n_; ++k) tab_[r * width_ + k] = sign * a[r * n_ + k];
      tab_[r * width_ + n_ + r] = 1.0;
      tab_[r * width_ + width_ - 1] = sign * b[r];
      basis_[r] = n_ + r;
    }

    // Phase 1: minimize the sum of artificials.
    std::vector<double> phase1(n_ + m_, 0.0);
    for (std::size_t k = n_; k < n_ + m_; ++k) phase1[k] = 1.0;
    const double infeas = run(phase1, /*allow_artificial=*/true);
    if (infeas > 1e-7) throw numeric_error("dense_lp: infeasible system");
    drive_out_artificials();

    // Phase 2: original objective, artificial columns barred from entering.
    std::vector<double> cost(n_ + m_, 0.0);
    for (std::size_t k = 0; k < n_; ++k) cost[k] = c[k];
    const double value = run(cost, /*allow_artificial=*/false);

    if (solution) {
      solution->assign(n_, 0.0);
      for (std::size_t r = 0; r < m_; ++r)
        if (basis_[r] < n_) (*solution)[basis_[r]] = tab_[r * width_ + width_ - 1];
    }
    return value;
  }

 private:
  double& at(std::size_t r, std::size_t k) { return tab_[r * width_ + k]; }

  void pivot(std::size_t r, std::size_t k) {
    const double piv = at(r, k);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) /= piv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = at(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(r, j);
      at(i, k) = 0.0;
    }
    basis_[r] = k;
  }

  double run(const std::vector<double>& cost, bool allow_artificial) {
    const std::size_t ncols = n_ + m_;
    std::vector<double> y(m_);  // multipliers for reduced costs
    while (true) {
      for (std::size_t r = 0; r < m_; ++r) y[r] = cost[basis_[r]];
      // Bland: first column with negative reduced cost.
      std::size_t enter = ncols;
      for (std::size_t k = 0; k < ncols; ++k) {
        if (!allow_artificial && k >= n_) break;
        bool basic = false;
        for (std::size_t r = 0; r < m_; ++r)
          if (basis_[r] == k) {
            basic = true;
            break;
          }
        if (basic) continue;
        double rc = cost[k];
        for (std::size_t r = 0; r < m_; ++r) rc -= y[r] * at(r, k);
        if (rc < -tol) {
          enter = k;
          break;
        }
      }
      if (enter == ncols) break;
      // Ratio test; Bland tie-break on the leaving basis index.
      std::size_t leave = m_;
      double best = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        const double ark = at(r, enter);
        if (ark <= tol) continue;
        const double ratio = at(r, width_ - 1) / ark;
        if (leave == m_ || ratio < best - tol ||
            (ratio < best + tol && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == m_) throw numeric_error("dense_lp: unbounded objective");
      pivot(leave, enter);
    }
    double v = 0.0;
    for (std::size_t r = 0; r < m_; ++r) v += cost[basis_[r]] * at(r, width_ - 1);
    return v;
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t k = 0;
      for (; k < n_; ++k)
        if (std::fabs(at(r, k)) > 1e-9) break;
      if (k < n_) pivot(r, k);
      // Otherwise the row is redundant; the artificial stays basic at zero.
    }
  }

  std::size_t m_ = 0, n_ = 0, width_ = 0;
  std::vector<double> tab_;
  std::vector<std::size_t> basis_;
};

}  // namespace pathot
