#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pathot/errors.hpp"
#include "pathot/gaussian.hpp"

namespace pathot {

// One path in (R^d)^T, stored time-major so the prefix x_{1:t} is the first
// t*d entries.
struct path {
  int T = 0;
  int d = 0;
  std::vector<double> entries;  // size T*d

  path() = default;
  path(int T_, int d_, std::vector<double> e) : T(T_), d(d_), entries(std::move(e)) {
    if (T < 1 || d < 1) throw config_error("path: T and d must be >= 1");
    if (entries.size() != static_cast<std::size_t>(T) * d)
      throw config_error("path: entry count does not match T*d");
    for (double v : entries)
      if (!std::isfinite(v)) throw config_error("path: entries must be finite");
  }

  std::span<const double> step(int t) const {  // 0-based time index
    return {entries.data() + static_cast<std::size_t>(t) * d, static_cast<std::size_t>(d)};
  }
  std::span<const double> prefix(int t) const {  // first t steps
    return {entries.data(), static_cast<std::size_t>(t) * d};
  }
};

inline double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dv = a[i] - b[i];
    s += dv * dv;
  }
  return s;
}

struct moment_report {
  std::vector<double> mean;    // length T*d
  double variance_trace = 0.0;
  double m_r = 0.0;            // int |x|^r
};

struct exp_moment_result {
  double value = 1.0;      // +inf when overflowed
  double log_value = 0.0;  // always finite for finite inputs
  bool overflow = false;
};

// Finitely supported path measure. Immutable after construction; weights are
// renormalized when their sum is within `input_tolerance` of 1 and rejected
// otherwise.
class discrete_measure {
 public:
  static constexpr double input_tolerance = 1e-9;
  static constexpr double internal_tolerance = 1e-12;

  discrete_measure(int T, int d, std::vector<double> flat_paths,
                   std::vector<double> weights, double weight_floor = 0.0)
      : T_(T), d_(d), paths_(std::move(flat_paths)), weights_(std::move(weights)) {
    if (T_ < 1 || d_ < 1) throw config_error("discrete_measure: T and d must be >= 1");
    const std::size_t stride = static_cast<std::size_t>(T_) * d_;
    if (paths_.empty() || paths_.size() % stride != 0)
      throw config_error("discrete_measure: path data does not match T*d");
    n_ = paths_.size() / stride;
    if (weights_.size() != n_)
      throw config_error("discrete_measure: weight count does not match path count");
    for (double v : paths_)
      if (!std::isfinite(v)) throw config_error("discrete_measure: entries must be finite");
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w > 0.0)) throw config_error("discrete_measure: weights must be positive");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > input_tolerance)
      throw config_error("discrete_measure: weights sum to " + std::to_string(sum) +
                         ", outside tolerance " + std::to_string(input_tolerance));
    for (double& w : weights_) {
      w /= sum;
      if (w < weight_floor)
        throw config_error("discrete_measure: weight below configured floor");
    }
  }

  static discrete_measure from_paths(const std::vector<path>& ps,
                                     std::vector<double> weights,
                                     double weight_floor = 0.0) {
    if (ps.empty()) throw config_error("discrete_measure: need at least one path");
    const int T = ps.front().T, d = ps.front().d;
    std::vector<double> flat;
    flat.reserve(ps.size() * ps.front().entries.size());
    for (const path& p : ps) {
      if (p.T != T || p.d != d)
        throw config_error("discrete_measure: inconsistent path shapes");
      flat.insert(flat.end(), p.entries.begin(), p.entries.end());
    }
    return discrete_measure(T, d, std::move(flat), std::move(weights), weight_floor);
  }

  int T() const { return T_; }
  int d() const { return d_; }
  std::size_t size() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(T_) * d_; }

  std::span<const double> atom(std::size_t j) const {
    return {paths_.data() + j * dim(), dim()};
  }
  std::span<const double> atom_prefix(std::size_t j, int t) const {  // x_{1:t}
    return {paths_.data() + j * dim(), static_cast<std::size_t>(t) * d_};
  }
  std::span<const double> atom_step(std::size_t j, int t) const {  // x_{t+1}, 0-based t
    return {paths_.data() + j * dim() + static_cast<std::size_t>(t) * d_,
            static_cast<std::size_t>(d_)};
  }
  double weight(std::size_t j) const { return weights_[j]; }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> flat() const { return paths_; }

  discrete_measure translated(std::span<const double> c) const {
    std::vector<double> shifted = paths_;
    const std::size_t k = dim();
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < k; ++i) shifted[j * k + i] += c[i];
    return discrete_measure(T_, d_, std::move(shifted), weights_);
  }

  // Marginal of the coordinate block [first, last) of every atom, e.g. the
  // prefix marginal mu_{1:t} or the single-step marginal mu_{t+1}.
  discrete_measure coordinate_marginal(int first_step, int last_step) const {
    const int steps = last_step - first_step;
    std::vector<double> flat;
    flat.reserve(n_ * steps * d_);
    for (std::size_t j = 0; j < n_; ++j) {
      auto a = atom(j);
      flat.insert(flat.end(), a.begin() + static_cast<std::size_t>(first_step) * d_,
                  a.begin() + static_cast<std::size_t>(last_step) * d_);
    }
    return discrete_measure(steps, d_, std::move(flat), weights_);
  }

 private:
  int T_;
  int d_;
  std::size_t n_ = 0;
  std::vector<double> paths_;  // n * T * d, atom-major then time-major
  std::vector<double> weights_;
};

inline moment_report moments(const discrete_measure& m, double r) {
  if (!(r > 0.0)) throw config_error("moments: r must be positive");
  moment_report rep;
  rep.mean.assign(m.dim(), 0.0);
  for (std::size_t j = 0; j < m.size(); ++j) {
    auto a = m.atom(j);
    for (std::size_t i = 0; i < a.size(); ++i) rep.mean[i] += m.weight(j) * a[i];
  }
  kahan_sum var, mr;
  for (std::size_t j = 0; j < m.size(); ++j) {
    auto a = m.atom(j);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double dv = a[i] - rep.mean[i];
      s += dv * dv;
    }
    var.add(m.weight(j) * s);
    mr.add(m.weight(j) * std::pow(sq_norm(a), 0.5 * r));
  }
  rep.variance_trace = var.value();
  rep.m_r = mr.value();
  return rep;
}

// E_theta(mu) = sum_j w_j exp(theta |x_j|^2), evaluated in log space. The
// overflow flag is raised (value = +inf) when the result exceeds double
// range; it is never silently saturated.
inline exp_moment_result exp_moment(const discrete_measure& m, double theta) {
  if (!std::isfinite(theta)) throw config_error("exp_moment: theta must be finite");
  std::vector<double> terms(m.size());
  for (std::size_t j = 0; j < m.size(); ++j)
    terms[j] = std::log(m.weight(j)) + theta * sq_norm(m.atom(j));
  exp_moment_result r;
  r.log_value = log_sum_exp(terms);
  if (r.log_value > std::log(std::numeric_limits<double>::max())) {
    r.overflow = true;
    r.value = std::numeric_limits<double>::infinity();
  } else {
    r.value = std::exp(r.log_value);
  }
  return r;
}

}  // namespace pathot
