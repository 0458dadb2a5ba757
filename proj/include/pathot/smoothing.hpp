#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pathot/errors.hpp"
#include "pathot/gaussian.hpp"
#include "pathot/measure.hpp"
#include "pathot/rng.hpp"

namespace pathot {

// mu * N_sigma as an explicit Gaussian mixture over the base atoms.
struct smoothed_measure {
  discrete_measure base;
  double sigma = 1.0;

  smoothed_measure(discrete_measure b, double s) : base(std::move(b)), sigma(s) {
    if (!(sigma > 0.0)) throw config_error("smoothed_measure: sigma must be positive");
  }

  // log of the mixture density of the prefix marginal at x_{1:t} (t = T for
  // the full path); the density of (mu_{1:t}) * N_sigma on (R^d)^t.
  double log_prefix_density(std::span<const double> prefix) const {
    const std::size_t len = prefix.size();
    std::vector<double> terms(base.size());
    const double log_norm =
        -0.5 * static_cast<double>(len) * std::log(2.0 * M_PI * sigma * sigma);
    for (std::size_t j = 0; j < base.size(); ++j) {
      const auto a = base.atom(j);
      terms[j] = std::log(base.weight(j)) + log_norm -
                 sq_dist(prefix, a.subspan(0, len)) / (2.0 * sigma * sigma);
    }
    return log_sum_exp(terms);
  }

  double density(std::span<const double> x) const { return std::exp(log_prefix_density(x)); }
};

// One-step conditional law (mu^sigma)_{x_{1:t}}: a Gaussian mixture on R^d
// with one component per base atom (equal means merged). Quantile machinery
// is available for d = 1 only.
struct kernel_mixture {
  int d = 1;
  std::vector<double> means;        // component count * d
  std::vector<double> log_weights;  // normalized: logsumexp = 0
  double sigma = 1.0;

  std::size_t components() const { return log_weights.size(); }
  double weight(std::size_t j) const { return std::exp(log_weights[j]); }
  double mean1(std::size_t j) const { return means[j]; }

  void require_1d(const char* who) const {
    if (d != 1) throw config_error(std::string(who) + ": kernel must be one-dimensional");
  }
};

inline kernel_mixture single_gaussian(double mean, double sigma) {
  return kernel_mixture{1, {mean}, {0.0}, sigma};
}

inline kernel_mixture mixture_1d(std::vector<double> means, std::vector<double> weights,
                                 double sigma) {
  if (means.size() != weights.size() || means.empty())
    throw config_error("mixture_1d: shape mismatch");
  std::vector<double> lw(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!(weights[j] > 0.0)) throw config_error("mixture_1d: weights must be positive");
    lw[j] = std::log(weights[j]);
  }
  const double z = log_sum_exp(lw);
  for (double& v : lw) v -= z;
  kernel_mixture k{1, std::move(means), std::move(lw), sigma};
  return k;
}

// Exact conditional of the Gaussian mixture: component j keeps mean
// x^j_{t+1} and scale sigma, with log-weight
//   log w_j - |prefix - x^j_{1:t}|^2 / (2 sigma^2),
// normalized by log-sum-exp. Components with bitwise-equal means are merged
// (the mixture is unchanged; resampled bases collapse to few components).
inline kernel_mixture disintegrate(const smoothed_measure& sm,
                                   std::span<const double> prefix) {
  const int d = sm.base.d();
  if (prefix.size() % d != 0) throw config_error("disintegrate: prefix shape mismatch");
  const int t = static_cast<int>(prefix.size()) / d;
  if (t < 1 || t > sm.base.T() - 1) throw config_error("disintegrate: t out of range");
  for (double v : prefix)
    if (!std::isfinite(v)) throw config_error("disintegrate: prefix must be finite");

  const double inv2s2 = 1.0 / (2.0 * sm.sigma * sm.sigma);
  const std::size_t n = sm.base.size();
  std::vector<double> lw(n);
  for (std::size_t j = 0; j < n; ++j)
    lw[j] = std::log(sm.base.weight(j)) -
            sq_dist(prefix, sm.base.atom_prefix(j, t)) * inv2s2;
  const double z = log_sum_exp(lw);

  kernel_mixture k;
  k.d = d;
  k.sigma = sm.sigma;
  if (d == 1) {
    std::vector<std::pair<double, double>> comp(n);  // (mean, log weight)
    for (std::size_t j = 0; j < n; ++j) comp[j] = {sm.base.atom_step(j, t)[0], lw[j] - z};
    std::sort(comp.begin(), comp.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [mean, logw] : comp) {
      if (!k.means.empty() && k.means.back() == mean) {
        const double a = k.log_weights.back(), b = logw;
        const double hi = std::max(a, b);
        k.log_weights.back() = hi + std::log1p(std::exp(std::min(a, b) - hi));
      } else {
        k.means.push_back(mean);
        k.log_weights.push_back(logw);
      }
    }
  } else {
    k.means.resize(n * d);
    k.log_weights.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto step = sm.base.atom_step(j, t);
      std::copy(step.begin(), step.end(), k.means.begin() + j * d);
      k.log_weights[j] = lw[j] - z;
    }
  }
  return k;
}

inline double mixture_pdf(const kernel_mixture& k, double x) {
  k.require_1d("mixture_pdf");
  double s = 0.0;
  for (std::size_t j = 0; j < k.components(); ++j)
    s += k.weight(j) * normal_pdf(x, k.means[j], k.sigma);
  return s;
}

inline double mixture_cdf(const kernel_mixture& k, double x) {
  k.require_1d("mixture_cdf");
  kahan_sum s;
  for (std::size_t j = 0; j < k.components(); ++j)
    s.add(k.weight(j) * normal_cdf(x, k.means[j], k.sigma));
  return std::min(1.0, std::max(0.0, s.value()));
}

// Solves cdf(q) = u by bisection sharpened with safeguarded Newton steps,
// to |cdf(q) - u| <= 1e-12 and an argument bracket of width 1e-13 (the
// second condition keeps tail quantiles sharp where the density is tiny).
// The initial bracket is the extreme component means widened by 12 sigma
// (grown further in the rare case u lies beyond it).
inline double mixture_quantile(const kernel_mixture& k, double u) {
  k.require_1d("mixture_quantile");
  if (!(u > 0.0 && u < 1.0)) throw config_error("mixture_quantile: u must be in (0,1)");
  auto [mn, mx] = std::minmax_element(k.means.begin(), k.means.end());
  double lo = *mn - 12.0 * k.sigma, hi = *mx + 12.0 * k.sigma;
  while (mixture_cdf(k, lo) > u) lo -= 12.0 * k.sigma;
  while (mixture_cdf(k, hi) < u) hi += 12.0 * k.sigma;

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double f = mixture_cdf(k, x) - u;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    const bool tight = hi - lo <= 1e-13 * (1.0 + std::fabs(x));
    if (std::fabs(f) <= 1e-12 && tight) return x;
    const double deriv = mixture_pdf(k, x);
    double next = (deriv > 1e-300) ? x - f / deriv : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(x)))
      return x;
    x = next;
  }
  return x;
}

struct wp_mixture_result {
  double value = 0.0;       // truncated quantile-coupling distance
  double tail_bound = 0.0;  // analytic bound on the p-th-power mass ignored
  operator double() const { return value; }
};

namespace detail {

// Upper bound on int_z^inf t^p phi(t) dt via integration by parts.
inline double gaussian_upper_moment_bound(double z, double p) {
  const double phi = normal_pdf(z);
  if (z * z > p - 1.0 && z > 0.0)
    return std::pow(z, p - 1.0) * phi / (1.0 - (p - 1.0) / (z * z));
  return std::pow(std::max(z, 1.0), p + 1.0) * phi + 1.0;  // crude fallback
}

}  // namespace detail

// W_p between one-dimensional Gaussian mixtures by Gauss-Legendre quadrature
// of |F_a^{-1}(u) - F_b^{-1}(u)|^p over [delta, 1-delta], delta = 1e-6, with
// an analytic Gaussian-tail bound on the truncated mass reported alongside.
inline wp_mixture_result w_p_mixture_1d(const kernel_mixture& a, const kernel_mixture& b,
                                        double p, int quad_nodes = 256) {
  a.require_1d("w_p_mixture_1d");
  b.require_1d("w_p_mixture_1d");
  if (quad_nodes < 8) throw config_error("w_p_mixture_1d: need at least 8 nodes");
  if (!(p >= 1.0)) throw config_error("w_p_mixture_1d: p must be >= 1");
  constexpr double delta_u = 1e-6;

  static thread_local int cached_nodes = -1;
  static thread_local quadrature_rule rule;
  if (cached_nodes != quad_nodes) {
    rule = gauss_legendre(quad_nodes, delta_u, 1.0 - delta_u);
    cached_nodes = quad_nodes;
  }

  kahan_sum integral;
  for (int i = 0; i < quad_nodes; ++i) {
    const double qa = mixture_quantile(a, rule.nodes[i]);
    const double qb = mixture_quantile(b, rule.nodes[i]);
    integral.add(rule.weights[i] * std::pow(std::fabs(qa - qb), p));
  }

  // Quantile envelopes m_min + sigma*Phi^{-1}(u) <= Q(u) <= m_max + sigma*Phi^{-1}(u)
  // give |Qa - Qb| <= spread + |sigma_a - sigma_b| |Phi^{-1}(u)| in both tails.
  const auto [amn, amx] = std::minmax_element(a.means.begin(), a.means.end());
  const auto [bmn, bmx] = std::minmax_element(b.means.begin(), b.means.end());
  const double spread = std::max(0.0, std::max(*amx - *bmn, *bmx - *amn));
  const double ds = std::fabs(a.sigma - b.sigma);
  const double z0 = -normal_quantile(delta_u);
  const double pow2 = std::pow(2.0, p - 1.0);
  const double tail =
      2.0 * pow2 *
      (std::pow(spread, p) * delta_u + std::pow(ds, p) * detail::gaussian_upper_moment_bound(z0, p));

  wp_mixture_result r;
  r.value = std::pow(std::max(0.0, integral.value()), 1.0 / p);
  r.tail_bound = tail;
  return r;
}

// E_theta(mu * N_sigma) = (1 - 2 sigma^2 theta)^{-dT/2} E_{theta/(1-2 sigma^2 theta)}(mu),
// valid for theta < 1/(2 sigma^2); the integral diverges at the boundary.
inline exp_moment_result exp_moment_smoothed(const smoothed_measure& sm, double theta) {
  const double s2 = sm.sigma * sm.sigma;
  if (!(theta < 1.0 / (2.0 * s2)))
    throw numeric_error("exp_moment_smoothed: divergent, need theta < 1/(2 sigma^2)");
  const double shrink = 1.0 - 2.0 * s2 * theta;
  const double dT = static_cast<double>(sm.base.d()) * sm.base.T();
  exp_moment_result r = exp_moment(sm.base, theta / shrink);
  r.log_value += -0.5 * dT * std::log(shrink);
  if (r.log_value > std::log(std::numeric_limits<double>::max())) {
    r.overflow = true;
    r.value = std::numeric_limits<double>::infinity();
  } else {
    r.value = std::exp(r.log_value);
  }
  return r;
}

// int_{R^d} exp(a|y|^2 - b|x-y|^2) dy = (pi/(b-a))^{d/2} exp(ab/(b-a) |x|^2), 0 < a < b.
inline double gaussian_product_integral(double a, double b, std::span<const double> x) {
  if (!(a > 0.0) || !(b > a)) throw config_error("gaussian_product_integral: need 0 < a < b");
  const double d = static_cast<double>(x.size());
  const double log_val =
      0.5 * d * std::log(M_PI / (b - a)) + (a * b / (b - a)) * sq_norm(x);
  return std::exp(log_val);
}

// Ratio density of the kernel against N_{sigma eta}:
//   phi_sigma*mu(x_{1:t+1}) / (phi_sigma*mu(x_{1:t}) phi_{sigma eta}(x_{t+1})).
inline double density_ratio(const smoothed_measure& sm, std::span<const double> point,
                            double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw config_error("density_ratio: eta must be in (0,1)");
  const int d = sm.base.d();
  if (point.size() % d != 0 || point.size() < static_cast<std::size_t>(2 * d))
    throw config_error("density_ratio: point must be (t+1) x d with t >= 1");
  const int t = static_cast<int>(point.size()) / d - 1;
  if (t > sm.base.T() - 1) throw config_error("density_ratio: t out of range");
  const auto tail = point.subspan(static_cast<std::size_t>(t) * d, d);
  double log_tail_gauss = -0.5 * d * std::log(2.0 * M_PI * sm.sigma * sm.sigma * eta * eta) -
                          sq_norm(tail) / (2.0 * sm.sigma * sm.sigma * eta * eta);
  return std::exp(sm.log_prefix_density(point) -
                  sm.log_prefix_density(point.subspan(0, static_cast<std::size_t>(t) * d)) -
                  log_tail_gauss);
}

// The explicit lower bound for that ratio:
//   eta^d e^{-beta p' Var(mu_{1:t})/(2 s^2)}
//   (E_{q0/(2 s^2)}(mu_{t+1}))^{-beta p'/(1-beta p')}
//   e^{-beta p' |x_{1:t}-mean(mu_{1:t})|^2/(2 s^2)},
// with q0 = 2(p-1)(1/beta - p') and eta = sqrt(1/(2p)').
inline double density_lower_bound(const smoothed_measure& sm, std::span<const double> point,
                                  double beta, double p) {
  const int d = sm.base.d();
  const int t = static_cast<int>(point.size()) / d - 1;
  if (t < 1 || t > sm.base.T() - 1) throw config_error("density_lower_bound: t out of range");
  const double pc = p / (p - 1.0);  // p'
  if (!(beta > 0.0 && beta * pc < 1.0))
    throw numeric_error("density_lower_bound: need 0 < beta < 1/p'");
  const double q0 = 2.0 * (p - 1.0) * (1.0 / beta - pc);
  const double s2 = sm.sigma * sm.sigma;
  const double eta = std::sqrt(1.0 - 1.0 / (2.0 * p));

  const auto step_marginal = sm.base.coordinate_marginal(t, t + 1);
  const exp_moment_result e_q0 = exp_moment(step_marginal, q0 / (2.0 * s2));
  if (e_q0.overflow) throw numeric_error("density_lower_bound: exponential moment overflow");

  const auto prefix_marginal = sm.base.coordinate_marginal(0, t);
  const moment_report mom = moments(prefix_marginal, 2.0);
  double centered = 0.0;
  for (int i = 0; i < t * d; ++i) {
    const double dv = point[i] - mom.mean[i];
    centered += dv * dv;
  }

  const double bp = beta * pc;
  const double log_lb = d * std::log(eta) - bp / (2.0 * s2) * mom.variance_trace -
                        bp / (1.0 - bp) * e_q0.log_value - bp / (2.0 * s2) * centered;
  return std::exp(log_lb);
}

}  // namespace pathot
