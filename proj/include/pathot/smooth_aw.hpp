#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pathot/constants.hpp"
#include "pathot/errors.hpp"
#include "pathot/gaussian.hpp"
#include "pathot/measure.hpp"
#include "pathot/rng.hpp"
#include "pathot/smoothing.hpp"

namespace pathot {

enum class bound_mode { compact, subgaussian };

struct mc_config {
  std::size_t samples = 256;
  std::uint64_t seed = 0;
};

// Upper-bound estimate for AW_p^{(sigma)}(mu, nu), nu finitely supported:
//   compact mode:     W_p^{(s)}(mu_1, nu_1) + sum_t (int W_p(kernels)^p dnu^s)^{1/p}
//   subgaussian mode: the same shape with W_{2p}, power 1/(2p), times the
//                     exponential-moment prefactor E_theta(nu)^{1/(2p)},
//                     theta = 2 p beta (T-1) / (s^2 (1 - 4 p beta (T-1))).
// The first-marginal term is exact (1-d mixture quantile coupling); kernel
// integrals are Monte Carlo over y ~ nu^sigma with reported standard errors.
struct upper_bound_estimate {
  double value = 0.0;
  double standard_error = 0.0;
  double first_marginal_term = 0.0;    // exact W_r^{(sigma)}(mu_1, nu_1)
  std::vector<double> kernel_terms;    // per t: MC mean of W_r(kernels)^r
  std::vector<double> kernel_term_ses; // per t: standard error of that mean
  double prefactor = 1.0;              // 1 in compact mode
  bound_mode mode = bound_mode::compact;
  mc_config mc;
  double kernel_power = 0.0;           // r = p or 2p

  // The C-free structural part (value without the prefactor); rate
  // experiments regress this, constants only shift the log-log intercept.
  double structural() const {
    double s = first_marginal_term;
    for (double kt : kernel_terms) s += std::pow(std::max(0.0, kt), 1.0 / kernel_power);
    return s;
  }
};

// Weighted atom pick by inverse CDF over the weights.
inline std::size_t pick_atom_by_weight(const discrete_measure& m, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < m.size(); ++j) {
    acc += m.weight(j);
    if (u < acc) return j;
  }
  return m.size() - 1;
}

namespace detail {

inline kernel_mixture first_marginal_mixture(const discrete_measure& m, double sigma) {
  std::vector<double> means(m.size()), w(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    means[j] = m.atom_step(j, 0)[0];
    w[j] = m.weight(j);
  }
  return mixture_1d(std::move(means), std::move(w), sigma);
}

}  // namespace detail

inline upper_bound_estimate smooth_aw_upper(const discrete_measure& mu,
                                            const discrete_measure& nu, double sigma,
                                            double p, bound_mode mode, double beta,
                                            const mc_config& mc, int quad_nodes = 256) {
  if (mu.d() != 1 || nu.d() != 1)
    throw config_error("smooth_aw_upper: d = 1 required (1-d kernel quantile engine)");
  if (mu.T() != nu.T()) throw config_error("smooth_aw_upper: mismatched T");
  if (mc.samples < 1) throw config_error("smooth_aw_upper: need at least one MC sample");
  const int T = mu.T();

  upper_bound_estimate est;
  est.mode = mode;
  est.mc = mc;
  est.kernel_power = (mode == bound_mode::compact) ? p : 2.0 * p;
  const double r = est.kernel_power;

  if (mode == bound_mode::subgaussian) {
    check_parameter_set(p, T, beta);
    const double theta =
        2.0 * p * beta * (T - 1) / (sigma * sigma * (1.0 - 4.0 * p * beta * (T - 1)));
    const exp_moment_result e = exp_moment(nu, theta);
    if (e.overflow)
      throw numeric_error("smooth_aw_upper: exponential-moment prefactor overflows");
    est.prefactor = std::exp(e.log_value / (2.0 * p));
  }

  const smoothed_measure sm_mu(mu, sigma), sm_nu(nu, sigma);
  est.first_marginal_term =
      w_p_mixture_1d(detail::first_marginal_mixture(mu, sigma),
                     detail::first_marginal_mixture(nu, sigma), r, quad_nodes)
          .value;

  std::vector<double> prefix;
  for (int t = 1; t <= T - 1; ++t) {
    kahan_sum sum, sum_sq;
    for (std::size_t i = 0; i < mc.samples; ++i) {
      counter_rng rng(derive_seed(mc.seed, static_cast<std::uint64_t>(t), i));
      const std::size_t j = pick_atom_by_weight(nu, rng.uniform());
      prefix.assign(nu.atom_prefix(j, t).begin(), nu.atom_prefix(j, t).end());
      for (double& v : prefix) v += sigma * rng.normal();
      const double dist =
          w_p_mixture_1d(disintegrate(sm_mu, prefix), disintegrate(sm_nu, prefix), r,
                         quad_nodes)
              .value;
      const double powered = std::pow(dist, r);
      sum.add(powered);
      sum_sq.add(powered * powered);
    }
    const double mean = sum.value() / static_cast<double>(mc.samples);
    double se = 0.0;
    if (mc.samples > 1) {
      const double var =
          std::max(0.0, sum_sq.value() / static_cast<double>(mc.samples) - mean * mean);
      se = std::sqrt(var / static_cast<double>(mc.samples - 1));
    }
    est.kernel_terms.push_back(mean);
    est.kernel_term_ses.push_back(se);
  }

  est.value = est.prefactor * est.structural();
  double var_value = 0.0;
  for (int t = 0; t < T - 1; ++t) {
    const double mean = est.kernel_terms[t], se = est.kernel_term_ses[t];
    if (mean > 0.0 && se > 0.0) {
      const double dse = se * std::pow(mean, 1.0 / r - 1.0) / r;  // delta method
      var_value += dse * dse;
    }
  }
  est.standard_error = est.prefactor * std::sqrt(var_value);
  return est;
}

struct scan_config {
  double radius = 3.0;
  std::size_t pairs = 200;
  std::uint64_t seed = 0;
  int quad_nodes = 128;
};

struct scan_sample {
  std::vector<double> x, y;  // prefixes, length t*d
  double separation = 0.0;   // |x - y|
  double ratio = 0.0;        // W_p(kernel_x, kernel_y) / |x - y|
};

struct scan_result {
  double max_ratio = 0.0;
  std::vector<scan_sample> samples;
};

// Samples prefix pairs in the ball of radius R around mean(mu_{1:t}) and
// records the kernel-distance/prefix-distance ratios used for the local
// Lipschitz envelope diagnostics.
inline scan_result kernel_lipschitz_scan(const smoothed_measure& sm, int t, double p,
                                         const scan_config& cfg) {
  if (sm.base.d() != 1) throw config_error("kernel_lipschitz_scan: d = 1 required");
  if (!(cfg.radius > 0.0)) throw config_error("kernel_lipschitz_scan: radius must be positive");
  if (cfg.pairs < 2) throw config_error("kernel_lipschitz_scan: need at least 2 pairs");
  if (t < 1 || t > sm.base.T() - 1) throw config_error("kernel_lipschitz_scan: t out of range");

  const auto prefix_marginal = sm.base.coordinate_marginal(0, t);
  const moment_report mom = moments(prefix_marginal, 2.0);
  const int dim = t * sm.base.d();

  auto draw_in_ball = [&](counter_rng& rng, std::vector<double>& out) {
    out.resize(dim);
    double norm_sq = 0.0;
    for (int i = 0; i < dim; ++i) {
      out[i] = rng.normal();
      norm_sq += out[i] * out[i];
    }
    const double norm = std::sqrt(norm_sq);
    const double radius = cfg.radius * std::pow(rng.uniform(), 1.0 / dim);
    for (int i = 0; i < dim; ++i) out[i] = mom.mean[i] + (norm > 0 ? out[i] / norm : 0.0) * radius;
  };

  scan_result res;
  res.samples.reserve(cfg.pairs);
  for (std::size_t i = 0; i < cfg.pairs; ++i) {
    counter_rng rng(derive_seed(cfg.seed, i));
    scan_sample s;
    draw_in_ball(rng, s.x);
    draw_in_ball(rng, s.y);
    s.separation = std::sqrt(sq_dist(s.x, s.y));
    if (s.separation < 1e-12) continue;
    s.ratio = w_p_mixture_1d(disintegrate(sm, s.x), disintegrate(sm, s.y), p,
                             cfg.quad_nodes)
                  .value /
              s.separation;
    res.max_ratio = std::max(res.max_ratio, s.ratio);
    res.samples.push_back(std::move(s));
  }
  if (res.samples.empty()) throw numeric_error("kernel_lipschitz_scan: no valid pairs");
  return res;
}

// exp(beta (|x-m| v |y-m|)^2 / s^2 + beta |x-m|^2 / (2 s^2)); the envelope is
// c1 * c2 * this factor.
inline double lipschitz_envelope_factor(double beta, double sigma, double x_dist,
                                        double y_dist) {
  const double s2 = sigma * sigma;
  const double mx = std::max(x_dist, y_dist);
  return std::exp(beta * mx * mx / s2 + beta * x_dist * x_dist / (2.0 * s2));
}

struct envelope_constants {
  double c1 = 0.0;
  double c2_unit = 0.0;  // c2 evaluated at D = 1
  std::vector<double> center;
};

inline envelope_constants envelope_for(const discrete_measure& m, int t, double p,
                                       double sigma, double beta, double q) {
  const lipschitz_inputs in = lipschitz_inputs_for(m, t, p, sigma, beta, q);
  envelope_constants e;
  e.c1 = lipschitz_c1_log(p, m.d(), sigma, beta, in.log_e_q0, in.var_prefix);
  e.c2_unit = lipschitz_c2_log(p, m.d(), sigma, beta, q, 1.0, in.h_norm, in.m_r,
                               in.log_e_q, in.var_prefix);
  e.center = moments(m.coordinate_marginal(0, t), 2.0).mean;
  return e;
}

// Smallest D for which every sampled ratio satisfies the envelope: the
// Poincare constant is not explicit, so it is fitted once on a calibration
// corpus and then frozen.
inline double calibrate_poincare_d(const smoothed_measure& sm, int t, double p, double beta,
                                   double q, const scan_config& cfg) {
  const envelope_constants env = envelope_for(sm.base, t, p, sm.sigma, beta, q);
  const scan_result scan = kernel_lipschitz_scan(sm, t, p, cfg);
  double d_fit = 0.0;
  for (const auto& s : scan.samples) {
    const double xd = std::sqrt(sq_dist(s.x, env.center));
    const double yd = std::sqrt(sq_dist(s.y, env.center));
    const double bound_unit =
        env.c1 * env.c2_unit * lipschitz_envelope_factor(beta, sm.sigma, xd, yd);
    if (bound_unit > 0.0) d_fit = std::max(d_fit, s.ratio / bound_unit);
  }
  return d_fit;
}

}  // namespace pathot
