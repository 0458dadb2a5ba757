#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pathot/errors.hpp"

namespace pathot {

inline constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;
inline constexpr double sqrt_pi = 1.7724538509055160272981675;

inline double normal_pdf(double x, double mean = 0.0, double sigma = 1.0) {
  const double z = (x - mean) / sigma;
  return inv_sqrt_2pi / sigma * std::exp(-0.5 * z * z);
}

inline double log_normal_pdf(double x, double mean = 0.0, double sigma = 1.0) {
  const double z = (x - mean) / sigma;
  return -0.5 * z * z - std::log(sigma) + std::log(inv_sqrt_2pi);
}

inline double normal_cdf(double x, double mean = 0.0, double sigma = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sigma * 1.4142135623730950488));
}

// log(sum_i exp(v_i)); -inf for an empty input.
inline double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Kahan compensated accumulator; keeps long Monte Carlo sums order-stable.
class kahan_sum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

struct quadrature_rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1], Newton iteration on the Legendre recurrence.
inline quadrature_rule gauss_legendre(int n) {
  if (n < 1) throw config_error("gauss_legendre: need n >= 1");
  quadrature_rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[n - 1 - i] = r.weights[i];
  }
  return r;
}

// Rule for integrating f over (a,b): affine image of the [-1,1] rule.
inline quadrature_rule gauss_legendre(int n, double a, double b) {
  quadrature_rule r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

// Gauss-Hermite rule for weight exp(-x^2): Newton iteration on the
// orthonormal Hermite recurrence, starting from the usual asymptotic guesses.
inline quadrature_rule gauss_hermite(int n) {
  if (n < 1) throw config_error("gauss_hermite: need n >= 1");
  quadrature_rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double pim4 = 0.7511255444649424828587030;  // pi^{-1/4}
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * r.nodes[n - 1];
    else if (i == 3)
      z = 1.91 * z - 0.91 * r.nodes[n - 2];
    else
      z = 2.0 * z - r.nodes[n - i + 1];
    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (k + 1.0)) * p2 - std::sqrt(static_cast<double>(k) / (k + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    r.nodes[n - 1 - i] = z;
    r.nodes[i] = -z;
    r.weights[n - 1 - i] = 2.0 / (pp * pp);
    r.weights[i] = r.weights[n - 1 - i];
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

// Adaptive Simpson on [a,b] to a relative tolerance. Small and predictable;
// used for quadrature oracles rather than production paths.
namespace detail {
inline double adaptive_simpson_rec(const auto& f, double a, double b, double fa,
                                   double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

inline double adaptive_simpson(const auto& f, double a, double b, double tol,
                               int max_depth = 40) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace pathot
