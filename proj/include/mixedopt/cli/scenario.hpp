#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixedopt/error.hpp"
#include "mixedopt/fock.hpp"
#include "mixedopt/params.hpp"

namespace mixedopt::cli {

using json = nlohmann::ordered_json;

inline const std::set<std::string>& scenario_kinds() {
  static const std::set<std::string> k = {"param-sweep",    "fidelity-closed", "fidelity-open", "cat-wigner",
                                          "squeezed-wigner", "flow-check",      "convergence"};
  return k;
}

/// Kinds whose results depend on the Fock cutoff and get a convergence re-run.
inline bool uses_cutoff(const std::string& kind) {
  return kind == "fidelity-closed" || kind == "fidelity-open" || kind == "cat-wigner" || kind == "squeezed-wigner";
}

struct Scenario {
  std::string name;
  std::string kind;
  json raw;     // the file as read, echoed into the manifest
  json params;  // parameter block before resolution
  int n_a = 2;
  int n_b = 60;
  double rtol = 1e-8;
  double atol = 1e-10;
  int convergence_delta_n_b = 20;
  double convergence_tolerance = 1e-4;
};

namespace detail {

inline double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw Error(ErrorKind::InvalidInput, "'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "'" + key + "' must be finite");
  return x;
}

inline int integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw Error(ErrorKind::InvalidInput, "'" + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace detail

/// Turns a parameter block into ModelParams. Besides the plain fields it accepts
///   r       stationary squeezing, sets omega_p2 = delta_b tanh(2r) / 2
///   eps_re  Re[eps e^{i theta_d}], with theta_d set to the steady-state phase
///   r_e     a number or "match" (r_e = r)
///   delta_r r_e = r + delta_r
/// `overrides` replace or add keys before resolution (sweep axes, curves).
inline ModelParams resolve_params(const json& block, const json& overrides = json::object()) {
  json merged = block.is_null() ? json::object() : block;
  if (!merged.is_object()) throw Error(ErrorKind::InvalidInput, "'params' must be an object");
  for (auto it = overrides.begin(); it != overrides.end(); ++it) merged[it.key()] = it.value();

  static const std::set<std::string> known = {"delta_b", "chi",     "eps",  "eps_re",  "theta_d", "omega_p2",
                                              "r",       "theta_p", "kappa_a", "kappa_b", "n_th",   "r_e",
                                              "theta_e", "delta_r"};
  for (auto it = merged.begin(); it != merged.end(); ++it)
    if (!known.count(it.key())) throw Error(ErrorKind::InvalidInput, "unknown parameter '" + it.key() + "'");
  auto both = [&](const char* a, const char* b) {
    if (merged.contains(a) && merged.contains(b))
      throw Error(ErrorKind::InvalidInput, std::string("give either '") + a + "' or '" + b + "', not both");
  };
  both("eps", "eps_re");
  both("omega_p2", "r");
  both("r_e", "delta_r");

  ModelParams p;
  const std::map<std::string, double*> plain = {
      {"delta_b", &p.delta_b}, {"chi", &p.chi},         {"eps", &p.eps},         {"theta_d", &p.theta_d},
      {"omega_p2", &p.omega_p2}, {"theta_p", &p.theta_p}, {"kappa_a", &p.kappa_a}, {"kappa_b", &p.kappa_b},
      {"n_th", &p.n_th},       {"theta_e", &p.theta_e}};
  for (const auto& [key, field] : plain)
    if (merged.contains(key)) *field = detail::number(merged[key], key);

  if (merged.contains("r")) p.omega_p2 = 0.5 * p.delta_b * std::tanh(2.0 * detail::number(merged["r"], "r"));
  if (merged.contains("eps_re")) {
    if (merged.contains("theta_d")) throw Error(ErrorKind::InvalidInput, "'eps_re' fixes theta_d; drop 'theta_d'");
    p = with_drive_real_part(p, detail::number(merged["eps_re"], "eps_re"));
  }
  if (merged.contains("r_e")) {
    const json& v = merged["r_e"];
    if (v.is_string()) {
      if (v.get<std::string>() != "match") throw Error(ErrorKind::InvalidInput, "'r_e' must be a number or \"match\"");
      p.r_e = stationary_r(p);
    } else {
      p.r_e = detail::number(v, "r_e");
    }
  }
  if (merged.contains("delta_r")) p.r_e = stationary_r(p) + detail::number(merged["delta_r"], "delta_r");
  p.validate();
  return p;
}

inline Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "scenario must be a JSON object");
  Scenario s;
  s.raw = j;
  if (!j.contains("name") || !j["name"].is_string()) throw Error(ErrorKind::InvalidInput, "scenario needs a 'name'");
  if (!j.contains("kind") || !j["kind"].is_string()) throw Error(ErrorKind::InvalidInput, "scenario needs a 'kind'");
  s.name = j["name"].get<std::string>();
  s.kind = j["kind"].get<std::string>();
  if (!scenario_kinds().count(s.kind)) throw Error(ErrorKind::InvalidInput, "unknown scenario kind '" + s.kind + "'");
  if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
    throw Error(ErrorKind::InvalidInput, "scenario name must be a plain file stem");
  s.params = j.value("params", json::object());

  if (j.contains("dims")) {
    const json& d = j["dims"];
    if (d.contains("n_a")) s.n_a = detail::integer(d["n_a"], "n_a");
    if (d.contains("n_b")) s.n_b = detail::integer(d["n_b"], "n_b");
  }
  if (j.contains("integrator")) {
    const json& o = j["integrator"];
    if (o.contains("rtol")) s.rtol = detail::number(o["rtol"], "rtol");
    if (o.contains("atol")) s.atol = detail::number(o["atol"], "atol");
  }
  if (j.contains("convergence")) {
    const json& c = j["convergence"];
    if (c.contains("delta_n_b")) s.convergence_delta_n_b = detail::integer(c["delta_n_b"], "delta_n_b");
    if (c.contains("tolerance")) s.convergence_tolerance = detail::number(c["tolerance"], "tolerance");
  }
  if (!(s.rtol > 0.0) || !(s.atol > 0.0)) throw Error(ErrorKind::InvalidInput, "integrator tolerances must be > 0");
  if (s.convergence_delta_n_b < 0) throw Error(ErrorKind::InvalidInput, "delta_n_b must be >= 0");
  if (uses_cutoff(s.kind)) HilbertConfig(s.n_a, s.n_b);  // validates cutoffs
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, "'" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

/// Evenly spaced or explicit axis values: {"min", "max", "points"} or {"values": [...]}.
inline std::vector<double> axis_values(const json& axis) {
  std::vector<double> v;
  if (axis.contains("values")) {
    for (const auto& x : axis["values"]) v.push_back(detail::number(x, "values"));
  } else {
    const double lo = detail::number(axis.at("min"), "min");
    const double hi = detail::number(axis.at("max"), "max");
    const int n = detail::integer(axis.at("points"), "points");
    if (n < 1) throw Error(ErrorKind::InvalidInput, "axis needs at least one point");
    for (int i = 0; i < n; ++i) v.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  }
  if (v.empty()) throw Error(ErrorKind::InvalidInput, "empty axis");
  return v;
}

/// CSV column name (with unit) for a parameter key. Rates and amplitudes are
/// ratios to delta_b, angles are in radians.
inline std::string param_column(const std::string& key) {
  static const std::map<std::string, std::string> names = {
      {"chi", "chi_over_Delta_b"},         {"eps", "eps_over_Delta_b"},         {"eps_re", "eps_re_over_Delta_b"},
      {"omega_p2", "Omega_p_over_Delta_b"}, {"kappa_a", "kappa_a_over_Delta_b"}, {"kappa_b", "kappa_b_over_Delta_b"},
      {"theta_d", "theta_d_rad"},          {"theta_p", "theta_p_rad"},          {"theta_e", "theta_e_rad"},
      {"r", "r"},                          {"r_e", "r_e"},                      {"delta_r", "delta_r"},
      {"n_th", "n_th"},                    {"delta_b", "Delta_b"}};
  const auto it = names.find(key);
  if (it == names.end()) throw Error(ErrorKind::InvalidInput, "no column name for parameter '" + key + "'");
  return it->second;
}

}  // namespace mixedopt::cli
