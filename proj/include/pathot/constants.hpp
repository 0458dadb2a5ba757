#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "pathot/errors.hpp"
#include "pathot/measure.hpp"

namespace pathot {

inline double holder_conjugate(double p) {
  if (!(p > 1.0)) throw config_error("holder_conjugate: p must be > 1");
  return p / (p - 1.0);
}

// Admissible smoothness parameters (P): 0 < beta < min{1/(4p(T-1)), 1/(8p)}.
// Reports which inequality failed.
inline void check_parameter_set(double p, int T, double beta) {
  if (!(p > 1.0)) throw numeric_error("parameter set (P): requires p > 1");
  if (T < 2) throw numeric_error("parameter set (P): requires T >= 2");
  if (!(beta > 0.0)) throw numeric_error("parameter set (P): beta <= 0 violates beta > 0");
  const double b1 = 1.0 / (4.0 * p * (T - 1));
  const double b2 = 1.0 / (8.0 * p);
  if (!(beta < b1))
    throw numeric_error("parameter set (P): beta = " + std::to_string(beta) +
                        " violates beta < 1/(4p(T-1)) = " + std::to_string(b1));
  if (!(beta < b2))
    throw numeric_error("parameter set (P): beta = " + std::to_string(beta) +
                        " violates beta < 1/(8p) = " + std::to_string(b2));
}

// Moment threshold (Q):
//   q*(p,T,beta) = max{ 2(2p-1)/beta,
//                       6p(T-1)beta/(1-4p(T-1)beta),
//                       12p beta/(1-8p beta),
//                       4(2p-1) + 2/(sqrt((4p)') - 1)^2 }.
inline double q_star(double p, int T, double beta) {
  check_parameter_set(p, T, beta);
  const double t1 = 2.0 * (2.0 * p - 1.0) / beta;
  const double t2 = 6.0 * p * (T - 1) * beta / (1.0 - 4.0 * p * (T - 1) * beta);
  const double t3 = 12.0 * p * beta / (1.0 - 8.0 * p * beta);
  const double c4 = 4.0 * p / (4.0 * p - 1.0);  // (4p)'
  const double t4 = 4.0 * (2.0 * p - 1.0) + 2.0 / ((std::sqrt(c4) - 1.0) * (std::sqrt(c4) - 1.0));
  return std::max(std::max(t1, t2), std::max(t3, t4));
}

// The moment order of the fast-rate theorem, 8p(2p-1)(T+9); equals
// q_star(p, T, 1/(4p(T+9))).
inline double theorem_q(double p, int T) {
  if (!(p > 1.0) || T < 2) throw config_error("theorem_q: need p > 1, T >= 2");
  return 8.0 * p * (2.0 * p - 1.0) * (T + 9.0);
}

inline double default_beta(double p, int T) { return 1.0 / (4.0 * p * (T + 9)); }

// Dual-Sobolev prefactor of the kernel bound:
//   c1 = p ((2p)')^{d/(2p')} e_q0^{beta/(1 - beta p')} e^{beta Var(mu_{1:t})/(2 s^2)},
// finite only under the moment precondition q0 = 2(p-1)(1/beta - p') > 0,
// i.e. beta < 1/p'. The exponential moment enters through its logarithm: for
// small beta the moment itself overflows while the power stays moderate.
inline double lipschitz_c1_log(double p, int d, double sigma, double beta,
                               double log_e_q0, double var_prefix) {
  const double pc = holder_conjugate(p);
  if (!(beta > 0.0 && beta < 1.0 / pc))
    throw numeric_error("lipschitz_c1: need 0 < beta < 1/p' = " + std::to_string(1.0 / pc));
  if (!std::isfinite(log_e_q0))
    throw numeric_error("lipschitz_c1: exponential moment must be finite and positive");
  const double conj2p = 2.0 * p / (2.0 * p - 1.0);  // (2p)'
  return p * std::pow(conj2p, d / (2.0 * pc)) *
         std::exp(beta / (1.0 - beta * pc) * log_e_q0 +
                  beta * var_prefix / (2.0 * sigma * sigma));
}

inline double lipschitz_c1(double p, int d, double sigma, double beta, double e_q0,
                           double var_prefix) {
  if (!(e_q0 > 0.0))
    throw numeric_error("lipschitz_c1: exponential moment must be finite and positive");
  return lipschitz_c1_log(p, d, sigma, beta, std::log(e_q0), var_prefix);
}

// The beta -> 0 limit of c1 for compactly supported measures:
//   p ((2p)')^{d/(2p')} ||e^{|x_{t+1}|^2}||_inf^{(p-1)/sigma^2}.
inline double lipschitz_c1_limit(double p, int d, double sigma, double max_step_sq_norm) {
  const double pc = holder_conjugate(p);
  const double conj2p = 2.0 * p / (2.0 * p - 1.0);
  return p * std::pow(conj2p, d / (2.0 * pc)) *
         std::exp((p - 1.0) / (sigma * sigma) * max_step_sq_norm);
}

// Dual-norm control prefactor:
//   c2 = s^{-2} D (2^{1/p}/(2p)')^{d/2} e^{beta Var(mu_{1:t})/(2 s^2)}
//        (h_norm + m_r^{1/r} e_q^{2(p-1)/q}),  r = q/(beta q - 2(p-1)).
// D is the (non-explicit) Poincare constant, supplied by the caller.
inline double lipschitz_c2_log(double p, int d, double sigma, double beta, double q,
                               double D, double h_norm, double m_r, double log_e_q,
                               double var_prefix) {
  if (!(q > 2.0 * (p - 1.0) / beta))
    throw numeric_error("lipschitz_c2: need q > 2(p-1)/beta = " +
                        std::to_string(2.0 * (p - 1.0) / beta));
  if (!(D > 0.0)) throw config_error("lipschitz_c2: D must be positive");
  const double conj2p = 2.0 * p / (2.0 * p - 1.0);
  const double r = q / (beta * q - 2.0 * (p - 1.0));
  return D / (sigma * sigma) * std::pow(std::pow(2.0, 1.0 / p) / conj2p, 0.5 * d) *
         std::exp(beta * var_prefix / (2.0 * sigma * sigma)) *
         (h_norm + std::pow(m_r, 1.0 / r) * std::exp(2.0 * (p - 1.0) / q * log_e_q));
}

inline double lipschitz_c2(double p, int d, double sigma, double beta, double q, double D,
                           double h_norm, double m_r, double e_q, double var_prefix) {
  return lipschitz_c2_log(p, d, sigma, beta, q, D, h_norm, m_r, std::log(e_q), var_prefix);
}

// Inputs for c1/c2 computed from a discrete base measure at prefix length t
// (log-space where the powers are extreme).
struct lipschitz_inputs {
  double e_q0 = 1.0;        // E_{q0/(2 s^2)}(mu_{t+1}); +inf when only the log fits
  double log_e_q0 = 0.0;
  double var_prefix = 0.0;  // Var(mu_{1:t})
  double h_norm = 0.0;      // || |w_{1:t}| e^{(p-1)|w_{t+1}|^2/s^2} ||_{L^{1/beta}(mu)}
  double m_r = 0.0;         // M_r(mu_{1:t})
  double e_q = 1.0;         // E_{q/(2 s^2)}(mu_{1:t})
  double log_e_q = 0.0;
  double q0 = 0.0;
  double r = 0.0;
};

inline lipschitz_inputs lipschitz_inputs_for(const discrete_measure& m, int t, double p,
                                             double sigma, double beta, double q) {
  if (t < 1 || t > m.T() - 1) throw config_error("lipschitz_inputs_for: t out of range");
  const double pc = holder_conjugate(p);
  const double s2 = sigma * sigma;
  lipschitz_inputs in;
  in.q0 = 2.0 * (p - 1.0) * (1.0 / beta - pc);
  in.r = q / (beta * q - 2.0 * (p - 1.0));

  const auto step = m.coordinate_marginal(t, t + 1);
  const auto prefix = m.coordinate_marginal(0, t);
  const exp_moment_result eq0 = exp_moment(step, in.q0 / (2.0 * s2));
  in.e_q0 = eq0.value;
  in.log_e_q0 = eq0.log_value;
  const exp_moment_result eq = exp_moment(prefix, q / (2.0 * s2));
  in.e_q = eq.value;
  in.log_e_q = eq.log_value;

  const moment_report mom = moments(prefix, in.r);
  in.var_prefix = mom.variance_trace;
  in.m_r = mom.m_r;

  // ||h||_{L^{1/beta}} = (sum_j w_j h_j^{1/beta})^beta with
  // log h_j = log|x^j_{1:t}| + (p-1)|x^j_{t+1}|^2 / s^2.
  std::vector<double> terms(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double prefix_norm = std::sqrt(sq_norm(m.atom_prefix(j, t)));
    const double log_h = (prefix_norm > 0.0 ? std::log(prefix_norm)
                                            : -std::numeric_limits<double>::infinity()) +
                         (p - 1.0) * sq_norm(m.atom_step(j, t)) / s2;
    terms[j] = std::log(m.weight(j)) + log_h / beta;
  }
  in.h_norm = std::exp(beta * log_sum_exp(terms));
  return in;
}

}  // namespace pathot
