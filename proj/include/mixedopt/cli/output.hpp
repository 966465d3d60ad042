#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mixedopt/cli/scenario.hpp"
#include "mixedopt/evolve.hpp"
#include "mixedopt/params.hpp"

namespace mixedopt::cli {

struct Table {
  std::string file;  // name inside the output directory
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string csv_text(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) out += (i ? "," : "") + t.header[i];
  out += "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size())
      throw Error(ErrorKind::InvalidInput, "row width does not match header in " + t.file);
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidInput, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::InvalidInput, "write failed for '" + path.string() + "'");
}

/// Worst-case propagation diagnostics over every output sample of a run.
struct Hygiene {
  double max_trace_deviation = 0.0;
  double max_hermiticity_deviation = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  double max_norm_deviation = 0.0;
  double max_tail_mass = 0.0;
  long samples = 0;
  bool degraded = false;

  void add(const SampleDiagnostics& d, const HygieneLimits& lim = {}) {
    max_trace_deviation = std::max(max_trace_deviation, d.trace_deviation);
    max_hermiticity_deviation = std::max(max_hermiticity_deviation, d.hermiticity_deviation);
    if (!std::isnan(d.min_eigenvalue)) min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
    max_norm_deviation = std::max(max_norm_deviation, d.norm_deviation);
    if (!within(d, lim)) degraded = true;
    ++samples;
  }

  void merge(const Hygiene& o) {
    max_trace_deviation = std::max(max_trace_deviation, o.max_trace_deviation);
    max_hermiticity_deviation = std::max(max_hermiticity_deviation, o.max_hermiticity_deviation);
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    max_norm_deviation = std::max(max_norm_deviation, o.max_norm_deviation);
    max_tail_mass = std::max(max_tail_mass, o.max_tail_mass);
    samples += o.samples;
    degraded = degraded || o.degraded;
  }
};

inline json to_json(const Hygiene& h) {
  const HygieneLimits lim;
  json j;
  j["samples"] = h.samples;
  j["max_trace_deviation"] = h.max_trace_deviation;
  j["max_hermiticity_deviation"] = h.max_hermiticity_deviation;
  j["min_eigenvalue"] = std::isfinite(h.min_eigenvalue) ? json(h.min_eigenvalue) : json(nullptr);
  j["max_norm_deviation"] = h.max_norm_deviation;
  j["max_tail_mass"] = h.max_tail_mass;
  j["limits"] = {{"trace", lim.trace},
                 {"hermiticity", lim.hermiticity},
                 {"min_eigenvalue", lim.min_eigenvalue},
                 {"norm", lim.norm}};
  j["degraded"] = h.degraded;
  return j;
}

inline json to_json(const ModelParams& p) {
  return {{"delta_b", p.delta_b}, {"chi", p.chi},         {"eps", p.eps},         {"theta_d", p.theta_d},
          {"omega_p2", p.omega_p2}, {"theta_p", p.theta_p}, {"kappa_a", p.kappa_a}, {"kappa_b", p.kappa_b},
          {"n_th", p.n_th},       {"r_e", p.r_e},         {"theta_e", p.theta_e}};
}

inline json to_json(const DerivedParams& d) {
  json j = {{"r", d.r},
            {"phi", d.phi},
            {"alpha_ss", d.alpha_ss},
            {"theta_d_required", d.theta_d_required},
            {"omega_a_eff", d.omega_a_eff},
            {"omega_a_eff_prime", d.omega_a_eff_prime},
            {"omega_b_eff", d.omega_b_eff},
            {"g1", d.g1},
            {"g2", d.g2},
            {"g2p", d.g2p},
            {"n_ss", d.n_ss},
            {"m_ss_re", d.m_ss.real()},
            {"m_ss_im", d.m_ss.imag()}};
  if (d.omega_b_eff > 0.0) {
    j["g1_over_omega_b"] = d.g1 / d.omega_b_eff;
    j["g2_over_omega_b"] = d.g2 / d.omega_b_eff;
  }
  return j;
}

inline json to_json(const AnalyticParams& a) {
  return {{"eta1", a.eta1}, {"beta1", a.beta1}, {"varpi1", a.varpi1}, {"eps10", a.eps10},
          {"t_c", a.t_c(0)}, {"t_s", a.t_s(0)}};
}

inline json to_json(const ode::Stats& s) {
  json j = {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
  if (s.accepted > 0) {
    j["min_step"] = s.min_step;
    j["max_step"] = s.max_step;
  }
  return j;
}

inline void accumulate(ode::Stats& into, const ode::Stats& s) {
  into.accepted += s.accepted;
  into.rejected += s.rejected;
  into.rhs_evals += s.rhs_evals;
  into.min_step = std::min(into.min_step, s.min_step);
  into.max_step = std::max(into.max_step, s.max_step);
}

/// Parameters, derived quantities and (when defined) analytic constants.
inline json parameter_dump(const ModelParams& p) {
  json j;
  j["model"] = to_json(p);
  const DerivedParams d = effective_params(p);
  j["derived"] = to_json(d);
  if (d.omega_b_eff > 0.0) j["analytic"] = to_json(analytic_params(d));
  return j;
}

}  // namespace mixedopt::cli
