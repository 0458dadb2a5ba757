#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathot/errors.hpp"
#include "pathot/measure.hpp"

namespace pathot {

// Measure file: {"T":int, "d":int, "paths":[[[reals]*d]*T, ...], "weights":[reals]}
inline discrete_measure load_measure(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("load_measure: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("T") || !j.contains("d") ||
      !j.contains("paths") || !j.contains("weights"))
    throw config_error("load_measure: missing T/d/paths/weights");
  const int T = j.at("T").get<int>();
  const int d = j.at("d").get<int>();
  if (T < 1 || d < 1) throw config_error("load_measure: T and d must be >= 1");
  const auto& jp = j.at("paths");
  const auto& jw = j.at("weights");
  if (!jp.is_array() || !jw.is_array() || jp.empty() || jp.size() != jw.size())
    throw config_error("load_measure: paths/weights must be equal-length non-empty arrays");
  std::vector<double> flat;
  flat.reserve(jp.size() * T * d);
  for (const auto& jpath : jp) {
    if (!jpath.is_array() || jpath.size() != static_cast<std::size_t>(T))
      throw config_error("load_measure: each path must have T steps");
    for (const auto& jstep : jpath) {
      if (!jstep.is_array() || jstep.size() != static_cast<std::size_t>(d))
        throw config_error("load_measure: each step must have d coordinates");
      for (const auto& v : jstep) {
        if (!v.is_number()) throw config_error("load_measure: coordinates must be numbers");
        flat.push_back(v.get<double>());
      }
    }
  }
  std::vector<double> weights;
  weights.reserve(jw.size());
  for (const auto& v : jw) {
    if (!v.is_number()) throw config_error("load_measure: weights must be numbers");
    weights.push_back(v.get<double>());
  }
  return discrete_measure(T, d, std::move(flat), std::move(weights));
}

inline nlohmann::json measure_to_json(const discrete_measure& m) {
  nlohmann::json j;
  j["T"] = m.T();
  j["d"] = m.d();
  auto paths = nlohmann::json::array();
  for (std::size_t k = 0; k < m.size(); ++k) {
    auto jpath = nlohmann::json::array();
    for (int t = 0; t < m.T(); ++t) {
      auto jstep = nlohmann::json::array();
      for (double v : m.atom_step(k, t)) jstep.push_back(v);
      jpath.push_back(std::move(jstep));
    }
    paths.push_back(std::move(jpath));
  }
  j["paths"] = std::move(paths);
  auto weights = nlohmann::json::array();
  for (double w : m.weights()) weights.push_back(w);
  j["weights"] = std::move(weights);
  return j;
}

inline void save_measure(std::ostream& out, const discrete_measure& m) {
  out << measure_to_json(m).dump(2) << "\n";
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// CSV export: one row per atom, columns t1_c1..tT_cd, weight.
inline void measure_to_csv(std::ostream& out, const discrete_measure& m) {
  for (int t = 1; t <= m.T(); ++t)
    for (int c = 1; c <= m.d(); ++c) out << 't' << t << "_c" << c << ',';
  out << "weight\n";
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (double v : m.atom(k)) out << format_double(v) << ',';
    out << format_double(m.weight(k)) << '\n';
  }
}

}  // namespace pathot
