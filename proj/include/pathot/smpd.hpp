#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathot/errors.hpp"
#include "pathot/gaussian.hpp"
#include "pathot/measure.hpp"
#include "pathot/rng.hpp"
#include "pathot/smooth_aw.hpp"
#include "pathot/smoothing.hpp"

namespace pathot {

// Base measure (T = 2, d = 1) convolved with the martingale-preserving noise
// xi = law of (Z1, Z1 + Z2), Z1, Z2 independent standard Gaussians. The first
// marginal is the mixture of N(a1_j, 1); the conditional of the second
// coordinate given Y1 = y1 mixes N(a2_j + y1 - a1_j, 1) with weights
// proportional to w_j phi(y1 - a1_j).
class xi_smoothed_measure {
 public:
  explicit xi_smoothed_measure(discrete_measure base) : base_(std::move(base)) {
    if (base_.T() != 2 || base_.d() != 1)
      throw config_error("xi_smoothed_measure: base must have T = 2, d = 1");
  }

  const discrete_measure& base() const { return base_; }

  kernel_mixture first_marginal() const {
    std::vector<double> means(base_.size()), w(base_.size());
    for (std::size_t j = 0; j < base_.size(); ++j) {
      means[j] = base_.atom(j)[0];
      w[j] = base_.weight(j);
    }
    return mixture_1d(std::move(means), std::move(w), 1.0);
  }

  std::vector<double> conditional_log_weights(double y1) const {
    std::vector<double> lw(base_.size());
    for (std::size_t j = 0; j < base_.size(); ++j) {
      const double z = y1 - base_.atom(j)[0];
      lw[j] = std::log(base_.weight(j)) - 0.5 * z * z;
    }
    const double norm = log_sum_exp(lw);
    for (double& v : lw) v -= norm;
    return lw;
  }

  kernel_mixture conditional(double y1) const {
    auto lw = conditional_log_weights(y1);
    kernel_mixture k;
    k.d = 1;
    k.sigma = 1.0;
    std::vector<std::pair<double, double>> comp(base_.size());
    for (std::size_t j = 0; j < base_.size(); ++j)
      comp[j] = {base_.atom(j)[1] + y1 - base_.atom(j)[0], lw[j]};
    std::sort(comp.begin(), comp.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [mean, logw] : comp) {
      if (!k.means.empty() && k.means.back() == mean) {
        const double hi = std::max(k.log_weights.back(), logw);
        k.log_weights.back() =
            hi + std::log1p(std::exp(std::min(k.log_weights.back(), logw) - hi));
      } else {
        k.means.push_back(mean);
        k.log_weights.push_back(logw);
      }
    }
    return k;
  }

  // mean((mu*xi)_{y1}) - y1 = sum_j w_hat_j(y1) (a2_j - a1_j).
  double conditional_mean_offset(double y1) const {
    const auto lw = conditional_log_weights(y1);
    double s = 0.0;
    for (std::size_t j = 0; j < base_.size(); ++j)
      s += std::exp(lw[j]) * (base_.atom(j)[1] - base_.atom(j)[0]);
    return s;
  }

  double log_joint_density(double y1, double y2) const {
    std::vector<double> terms(base_.size());
    for (std::size_t j = 0; j < base_.size(); ++j) {
      const double a1 = base_.atom(j)[0], a2 = base_.atom(j)[1];
      terms[j] = std::log(base_.weight(j)) + log_normal_pdf(y1, a1, 1.0) +
                 log_normal_pdf(y2, a2 + y1 - a1, 1.0);
    }
    return log_sum_exp(terms);
  }

 private:
  discrete_measure base_;
};

struct smpd_mc {
  std::size_t samples = 4096;
  std::uint64_t seed = 0;
};

struct smpd_quadrature {
  int nodes = 64;
};

struct smpd_value {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for quadrature evaluation
};

// Kernel-projection statistic (int |mean((mu*xi)_{y1}) - y1|^2 (mu*xi)_1(dy1))^{1/2}:
// an upper bound for SMPD(mu, 2) that vanishes exactly when mu*xi is a
// martingale (the W2 projection of a kernel onto {mean = y1} is a translation).
inline smpd_value smpd_statistic(const discrete_measure& m, const smpd_mc& cfg) {
  const xi_smoothed_measure xi(m);
  if (cfg.samples < 2) throw config_error("smpd_statistic: need at least 2 MC samples");
  kahan_sum sum, sum_sq;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    counter_rng rng(derive_seed(cfg.seed, i));
    const std::size_t j = pick_atom_by_weight(m, rng.uniform());
    const double y1 = m.atom(j)[0] + rng.normal();
    const double off = xi.conditional_mean_offset(y1);
    sum.add(off * off);
    sum_sq.add(off * off * off * off);
  }
  const double mean = sum.value() / static_cast<double>(cfg.samples);
  const double var =
      std::max(0.0, sum_sq.value() / static_cast<double>(cfg.samples) - mean * mean);
  const double se_mean = std::sqrt(var / static_cast<double>(cfg.samples - 1));
  smpd_value v;
  v.value = std::sqrt(std::max(0.0, mean));
  v.standard_error = (v.value > 0.0) ? se_mean / (2.0 * v.value) : std::sqrt(se_mean);
  return v;
}

inline smpd_value smpd_statistic(const discrete_measure& m, const smpd_quadrature& cfg) {
  const xi_smoothed_measure xi(m);
  if (cfg.nodes < 2) throw config_error("smpd_statistic: need at least 2 quadrature nodes");
  const quadrature_rule gh = gauss_hermite(cfg.nodes);
  kahan_sum sum;
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double a1 = m.atom(j)[0];
    for (int k = 0; k < cfg.nodes; ++k) {
      const double y1 = a1 + M_SQRT2 * gh.nodes[k];
      const double off = xi.conditional_mean_offset(y1);
      sum.add(m.weight(j) * gh.weights[k] / sqrt_pi * off * off);
    }
  }
  return {std::sqrt(std::max(0.0, sum.value())), 0.0};
}

struct smpd_test_report {
  double statistic = 0.0;
  double statistic_se = 0.0;
  double threshold = 0.0;  // deviation-scale estimate / alpha
  double deviation_scale = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  bool reject = false;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    return nlohmann::json{{"statistic", statistic}, {"threshold", threshold},
                          {"alpha", alpha},         {"n", n},
                          {"decision", reject ? "reject" : "accept"},
                          {"seed", seed}};
  }
};

struct smpd_test_config {
  int split_reps = 3;
  std::size_t statistic_samples = 4096;
  std::size_t deviation_samples = 64;
  int quad_nodes = 128;
};

namespace detail {

inline discrete_measure subset_uniform(const discrete_measure& m,
                                       const std::vector<std::size_t>& idx) {
  std::vector<double> flat;
  flat.reserve(idx.size() * m.dim());
  for (std::size_t i : idx) {
    const auto a = m.atom(i);
    flat.insert(flat.end(), a.begin(), a.end());
  }
  return discrete_measure(m.T(), m.d(), std::move(flat),
                          std::vector<double>(idx.size(), 1.0 / idx.size()));
}

// Structural AW_2 upper bound between two xi-smoothed empirical measures:
// exact W2 of the first marginals plus the Monte Carlo kernel term, with the
// xi conditional structure in place of the isotropic one.
inline double aw2_upper_xi(const xi_smoothed_measure& a, const xi_smoothed_measure& b,
                           std::size_t mc_samples, std::uint64_t seed, int quad_nodes) {
  double est = w_p_mixture_1d(a.first_marginal(), b.first_marginal(), 2.0, quad_nodes).value;
  kahan_sum sum;
  const discrete_measure& nb = b.base();
  for (std::size_t i = 0; i < mc_samples; ++i) {
    counter_rng rng(derive_seed(seed, i));
    const std::size_t j = pick_atom_by_weight(nb, rng.uniform());
    const double y1 = nb.atom(j)[0] + rng.normal();
    const double dist = w_p_mixture_1d(a.conditional(y1), b.conditional(y1), 2.0,
                                       quad_nodes)
                            .value;
    sum.add(dist * dist);
  }
  return est + std::sqrt(sum.value() / static_cast<double>(mc_samples));
}

}  // namespace detail

// Martingale test: Markov inequality on |SMPD(mu) - SMPD(mu_hat_n)| with the
// deviation scale E[AW_2(mu*xi, mu_hat_n*xi)] estimated by repeated sample
// splitting, then reject when the statistic exceeds scale/alpha.
inline smpd_test_report smpd_test(const discrete_measure& samples, double alpha,
                                  int split_reps, std::uint64_t seed,
                                  const smpd_test_config& cfg = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("smpd_test: alpha must be in (0,1)");
  if (samples.size() < 40) throw config_error("smpd_test: need n >= 40 samples");
  if (split_reps < 1) throw config_error("smpd_test: need split_reps >= 1");
  if (samples.T() != 2 || samples.d() != 1)
    throw config_error("smpd_test: samples must have T = 2, d = 1");
  for (std::size_t j = 0; j < samples.size(); ++j)
    if (std::fabs(samples.weight(j) * samples.size() - 1.0) > 1e-9)
      throw config_error("smpd_test: input must be a uniform-weight empirical measure");

  smpd_test_report rep;
  rep.alpha = alpha;
  rep.n = samples.size();
  rep.seed = seed;

  const smpd_value stat =
      smpd_statistic(samples, smpd_mc{cfg.statistic_samples, derive_seed(seed, 0)});
  rep.statistic = stat.value;
  rep.statistic_se = stat.standard_error;

  kahan_sum scale;
  std::vector<std::size_t> idx(samples.size());
  for (int rep_i = 0; rep_i < split_reps; ++rep_i) {
    counter_rng rng(derive_seed(seed, 1, static_cast<std::uint64_t>(rep_i)));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform() * (i + 1))]);
    const std::size_t half = idx.size() / 2;
    const xi_smoothed_measure a(detail::subset_uniform(
        samples, std::vector<std::size_t>(idx.begin(), idx.begin() + half)));
    const xi_smoothed_measure b(detail::subset_uniform(
        samples, std::vector<std::size_t>(idx.begin() + half, idx.end())));
    scale.add(detail::aw2_upper_xi(a, b, cfg.deviation_samples,
                                   derive_seed(seed, 2, static_cast<std::uint64_t>(rep_i)),
                                   cfg.quad_nodes));
  }
  rep.deviation_scale = scale.value() / split_reps;
  rep.threshold = rep.deviation_scale / alpha;
  rep.reject = rep.statistic > rep.threshold;
  return rep;
}

}  // namespace pathot
