#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pathot/errors.hpp"
#include "pathot/measure.hpp"
#include "pathot/measure_io.hpp"
#include "pathot/rng.hpp"

namespace pathot {

// Built-in path-measure samplers. Every sampler is deterministic given
// (parameters, n, seed); path j draws from the stream derive_seed(seed, j),
// so a sample is reproducible independently of evaluation order.

struct resample_sampler {
  discrete_measure base;
};

struct gaussian_ar_sampler {  // X_1 = sd*eps_1, X_{t+1} = a X_t + sd*eps_{t+1}
  int T = 2;
  double a = 0.5;
  double sd = 1.0;
};

struct iid_gaussian_sampler {  // independent N(mean, sd^2) coordinates
  int T = 2;
  int d = 1;
  double mean = 0.0;
  double sd = 1.0;
};

// Returns the base measure itself regardless of n; used to exercise the
// degenerate all-zero-estimate path of the rate experiments.
struct exact_base_sampler {
  discrete_measure base;
};

using sampler = std::variant<resample_sampler, gaussian_ar_sampler,
                             iid_gaussian_sampler, exact_base_sampler>;

namespace detail {

inline std::size_t pick_atom(const discrete_measure& base, double u) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < base.size(); ++j) {
    acc += base.weight(j);
    if (u < acc) return j;
  }
  return base.size() - 1;
}

}  // namespace detail

inline discrete_measure sample_empirical(const sampler& s, std::size_t n,
                                         std::uint64_t seed) {
  if (n < 1) throw config_error("sample_empirical: n must be >= 1");
  if (const auto* e = std::get_if<exact_base_sampler>(&s)) return e->base;

  if (const auto* r = std::get_if<resample_sampler>(&s)) {
    const std::size_t dim = r->base.dim();
    std::vector<double> flat(n * dim);
    for (std::size_t j = 0; j < n; ++j) {
      counter_rng rng(derive_seed(seed, j));
      auto a = r->base.atom(detail::pick_atom(r->base, rng.uniform()));
      std::copy(a.begin(), a.end(), flat.begin() + j * dim);
    }
    return discrete_measure(r->base.T(), r->base.d(), std::move(flat),
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  if (const auto* g = std::get_if<gaussian_ar_sampler>(&s)) {
    if (g->T < 1 || !(g->sd > 0.0)) throw config_error("gaussian_ar: need T >= 1, sd > 0");
    std::vector<double> flat(n * g->T);
    for (std::size_t j = 0; j < n; ++j) {
      counter_rng rng(derive_seed(seed, j));
      double x = 0.0;
      for (int t = 0; t < g->T; ++t) {
        x = (t == 0 ? 0.0 : g->a * x) + g->sd * rng.normal();
        flat[j * g->T + t] = x;
      }
    }
    return discrete_measure(g->T, 1, std::move(flat),
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  const auto& g = std::get<iid_gaussian_sampler>(s);
  if (g.T < 1 || g.d < 1 || !(g.sd > 0.0))
    throw config_error("iid_gaussian: need T,d >= 1, sd > 0");
  const std::size_t dim = static_cast<std::size_t>(g.T) * g.d;
  std::vector<double> flat(n * dim);
  for (std::size_t j = 0; j < n; ++j) {
    counter_rng rng(derive_seed(seed, j));
    for (std::size_t i = 0; i < dim; ++i) flat[j * dim + i] = g.mean + g.sd * rng.normal();
  }
  return discrete_measure(g.T, g.d, std::move(flat),
                          std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// Sampler specs in config files: {"name": "...", ...parameters...}.
// "resample"/"exact_base" take the base measure inline under "base".
inline sampler sampler_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name"))
    throw config_error("sampler: spec must be an object with a name");
  const std::string name = j.at("name").get<std::string>();
  auto base_of = [&j]() {
    if (!j.contains("base")) throw config_error("sampler: missing base measure");
    std::istringstream in(j.at("base").dump());
    return load_measure(in);
  };
  if (name == "resample") return resample_sampler{base_of()};
  if (name == "exact_base") return exact_base_sampler{base_of()};
  if (name == "gaussian_ar")
    return gaussian_ar_sampler{j.value("T", 2), j.value("a", 0.5), j.value("sd", 1.0)};
  if (name == "iid_gaussian")
    return iid_gaussian_sampler{j.value("T", 2), j.value("d", 1), j.value("mean", 0.0),
                                j.value("sd", 1.0)};
  throw config_error("sampler: unknown name '" + name + "'");
}

inline nlohmann::json sampler_to_json(const sampler& s) {
  nlohmann::json j;
  if (const auto* r = std::get_if<resample_sampler>(&s)) {
    j["name"] = "resample";
    j["base"] = measure_to_json(r->base);
  } else if (const auto* e = std::get_if<exact_base_sampler>(&s)) {
    j["name"] = "exact_base";
    j["base"] = measure_to_json(e->base);
  } else if (const auto* g = std::get_if<gaussian_ar_sampler>(&s)) {
    j["name"] = "gaussian_ar";
    j["T"] = g->T;
    j["a"] = g->a;
    j["sd"] = g->sd;
  } else {
    const auto& ig = std::get<iid_gaussian_sampler>(s);
    j["name"] = "iid_gaussian";
    j["T"] = ig.T;
    j["d"] = ig.d;
    j["mean"] = ig.mean;
    j["sd"] = ig.sd;
  }
  return j;
}

}  // namespace pathot
