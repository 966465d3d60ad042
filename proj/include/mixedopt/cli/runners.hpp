#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixedopt/analytic.hpp"
#include "mixedopt/cli/output.hpp"
#include "mixedopt/cli/scenario.hpp"
#include "mixedopt/evolve.hpp"
#include "mixedopt/hamiltonians.hpp"
#include "mixedopt/parallel.hpp"
#include "mixedopt/params.hpp"
#include "mixedopt/tomography.hpp"

#ifndef MIXEDOPT_VERSION
#define MIXEDOPT_VERSION "0.0.0"
#endif

namespace mixedopt::cli {

/// Everything one kind produces at one cutoff. Observables are the numbers
/// compared between the main run and the convergence re-run.
struct KindOutput {
  std::vector<Table> tables;
  std::map<std::string, std::vector<double>> observables;
  json details = json::object();
  Hygiene hygiene;
  ode::Stats stats;
  std::vector<std::string> warnings;
};

namespace detail {

inline Sign parse_sign(const json& j) {
  const std::string s = j.value("sign", std::string("+"));
  if (s == "+" || s == "plus") return Sign::Plus;
  if (s == "-" || s == "minus") return Sign::Minus;
  throw Error(ErrorKind::InvalidInput, "'sign' must be \"+\" or \"-\"");
}

inline WignerGridSpec parse_grid(const json& j) {
  WignerGridSpec g;
  if (!j.contains("grid")) return g;
  const json& o = j["grid"];
  if (o.contains("re_min")) g.re_min = number(o["re_min"], "re_min");
  if (o.contains("re_max")) g.re_max = number(o["re_max"], "re_max");
  if (o.contains("im_min")) g.im_min = number(o["im_min"], "im_min");
  if (o.contains("im_max")) g.im_max = number(o["im_max"], "im_max");
  if (o.contains("n_re")) g.n_re = integer(o["n_re"], "n_re");
  if (o.contains("n_im")) g.n_im = integer(o["n_im"], "n_im");
  if (g.n_re < 1 || g.n_im < 1 || !(g.re_max >= g.re_min) || !(g.im_max >= g.im_min))
    throw Error(ErrorKind::InvalidInput, "bad Wigner grid");
  return g;
}

/// {"t_max": T} or {"t_max_tc": m} (multiples of t_c), plus "points".
inline std::vector<double> time_grid(const json& j, double t_c) {
  const json& o = j.at("time");
  double t_max = 0.0;
  if (o.contains("t_max")) t_max = number(o["t_max"], "t_max");
  else t_max = number(o.at("t_max_tc"), "t_max_tc") * t_c;
  const int n = integer(o.at("points"), "points");
  if (!(t_max > 0.0) || n < 2) throw Error(ErrorKind::InvalidInput, "bad time grid");
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_max * i / (n - 1);
  return t;
}

inline StateVector initial_state(const json& j, const HilbertConfig& h) {
  const json init = j.value("initial", json{{"type", "superposition"}});
  const std::string type = init.value("type", std::string());
  if (type == "superposition") {
    Vector a = Vector::Zero(h.n_a);
    a(0) = a(1) = 1.0 / std::sqrt(2.0);
    return tensor(StateVector(SpaceTag::mode_a(h.n_a), a), fock_state(h.n_b, 0));
  }
  if (type == "fock-coherent") {
    const int ka = integer(init.at("n_a"), "n_a");
    if (ka < 0 || ka >= h.n_a) throw Error(ErrorKind::InvalidInput, "initial mode-a level outside cutoff");
    const json& b = init.at("beta");
    const cplx beta = b.is_array() ? cplx(number(b.at(0), "beta"), number(b.at(1), "beta")) : cplx(number(b, "beta"));
    return tensor(fock_state(h.n_a, ka, Space::ModeA), coherent_state(beta, h.n_b));
  }
  throw Error(ErrorKind::InvalidInput, "'initial.type' must be \"superposition\" or \"fock-coherent\"");
}

struct Curve {
  std::string label;
  json overrides;
};

inline std::vector<Curve> curves(const json& j) {
  std::vector<Curve> out;
  if (!j.contains("curves")) return {{"", json::object()}};
  for (const auto& c : j["curves"]) {
    const std::string label = c.value("label", std::string());
    if (label.empty() || label.find_first_of("/\\") != std::string::npos)
      throw Error(ErrorKind::InvalidInput, "each curve needs a plain 'label'");
    out.push_back({label, c.value("params", json::object())});
  }
  if (out.empty()) throw Error(ErrorKind::InvalidInput, "'curves' is empty");
  return out;
}

inline std::string curve_file(const Scenario& s, const Curve& c) {
  return c.label.empty() ? s.name + ".csv" : s.name + "_" + c.label + ".csv";
}

inline double norm_deviation(const StateVector& v) { return std::abs(v.norm() - 1.0); }

/// Diagnostics record for a state vector: eigenvalues are not sampled.
inline SampleDiagnostics pure_sample() {
  SampleDiagnostics d;
  d.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  return d;
}

inline void check_tail(Hygiene& h, double mass, const char* where) {
  h.max_tail_mass = std::max(h.max_tail_mass, mass);
  require_tail(mass, kTailThreshold, where);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// param-sweep

struct SweepColumn {
  std::string name;
  std::function<double(const ModelParams&, const DerivedParams&)> value;
};

inline const std::vector<SweepColumn>& sweep_columns() {
  static const std::vector<SweepColumn> cols = {
      {"r", [](const ModelParams&, const DerivedParams& d) { return d.r; }},
      {"alpha_ss", [](const ModelParams&, const DerivedParams& d) { return d.alpha_ss; }},
      {"alpha_ss_over_eps", [](const ModelParams& p, const DerivedParams& d) { return d.alpha_ss / p.eps; }},
      {"theta_d_required_rad", [](const ModelParams&, const DerivedParams& d) { return d.theta_d_required; }},
      {"N_ss", [](const ModelParams&, const DerivedParams& d) { return d.n_ss; }},
      {"Re_M_ss", [](const ModelParams&, const DerivedParams& d) { return d.m_ss.real(); }},
      {"Im_M_ss", [](const ModelParams&, const DerivedParams& d) { return d.m_ss.imag(); }},
      {"omega_a_over_Delta_b", [](const ModelParams&, const DerivedParams& d) { return d.omega_a_eff; }},
      {"omega_b_over_Delta_b", [](const ModelParams&, const DerivedParams& d) { return d.omega_b_eff; }},
      {"g1_over_Delta_b", [](const ModelParams&, const DerivedParams& d) { return d.g1; }},
      {"g2_over_Delta_b", [](const ModelParams&, const DerivedParams& d) { return d.g2; }},
      {"g2p_over_Delta_b", [](const ModelParams&, const DerivedParams& d) { return d.g2p; }},
      {"g1_over_omega_b", [](const ModelParams&, const DerivedParams& d) { return d.g1 / d.omega_b_eff; }},
      {"g2_over_omega_b", [](const ModelParams&, const DerivedParams& d) { return d.g2 / d.omega_b_eff; }},
      {"g2p_over_omega_b", [](const ModelParams&, const DerivedParams& d) { return d.g2p / d.omega_b_eff; }},
  };
  return cols;
}

inline KindOutput run_param_sweep(const Scenario& s) {
  const json& j = s.raw;
  std::vector<std::string> keys;
  std::vector<std::vector<double>> axes;
  for (const auto& a : j.at("axes")) {
    keys.push_back(a.at("param").get<std::string>());
    axes.push_back(axis_values(a));
  }
  if (axes.empty() || axes.size() > 2) throw Error(ErrorKind::InvalidInput, "param-sweep takes one or two axes");
  std::vector<const SweepColumn*> cols;
  for (const auto& c : j.at("columns")) {
    const std::string name = c.get<std::string>();
    const auto& all = sweep_columns();
    const auto it = std::find_if(all.begin(), all.end(), [&](const SweepColumn& x) { return x.name == name; });
    if (it == all.end()) throw Error(ErrorKind::InvalidInput, "unknown sweep column '" + name + "'");
    cols.push_back(&*it);
  }

  const std::size_t n0 = axes[0].size();
  const std::size_t n1 = axes.size() == 2 ? axes[1].size() : 1;
  Table t;
  t.file = s.name + ".csv";
  for (const auto& k : keys) t.header.push_back(param_column(k));
  for (const auto* c : cols) t.header.push_back(c->name);
  t.rows.resize(n0 * n1);
  parallel_for(n0 * n1, [&](std::size_t idx) {
    const std::size_t i = idx / n1, k = idx % n1;
    json ov = json::object();
    ov[keys[0]] = axes[0][i];
    std::vector<double> row = {axes[0][i]};
    if (axes.size() == 2) {
      ov[keys[1]] = axes[1][k];
      row.push_back(axes[1][k]);
    }
    const ModelParams p = resolve_params(s.params, ov);
    const DerivedParams d = effective_params(p);
    for (const auto* c : cols) row.push_back(c->value(p, d));
    t.rows[idx] = std::move(row);
  });

  KindOutput out;
  out.details["points"] = n0 * n1;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// fidelity-closed: exact transformed Hamiltonian against H_app

struct ClosedPair {
  Operator exact;
  Operator approx;
};

inline ClosedPair closed_pair(const DerivedParams& d, const HilbertConfig& h) {
  return {build_transformed_stationary(d, h), build_mixed_approx(d, h)};
}

inline KindOutput run_fidelity_closed(const Scenario& s, int n_b) {
  const json& j = s.raw;
  const HilbertConfig h(s.n_a, n_b);
  const StateVector psi0 = detail::initial_state(j, h);
  KindOutput out;

  if (j.contains("heatmap")) {
    const json& hm = j["heatmap"];
    const std::string kx = hm.at("x").at("param").get<std::string>();
    const std::string ky = hm.at("y").at("param").get<std::string>();
    const std::vector<double> xs = axis_values(hm["x"]), ys = axis_values(hm["y"]);
    Table t;
    t.file = s.name + ".csv";
    t.header = {param_column(kx), param_column(ky), "t_c_times_Delta_b", "F_c_at_t_c"};
    t.rows.resize(xs.size() * ys.size());
    std::vector<double> f(t.rows.size());
    std::vector<Hygiene> hyg(t.rows.size());
    parallel_for(t.rows.size(), [&](std::size_t idx) {
      const std::size_t i = idx / ys.size(), k = idx % ys.size();
      const ModelParams p = resolve_params(s.params, json{{kx, xs[i]}, {ky, ys[k]}});
      const DerivedParams d = effective_params(p);
      const double tc = analytic_params(d).t_c(0);
      const ClosedPair hp = closed_pair(d, h);
      const StateVector a = SpectralPropagator(hp.exact).evolve(psi0, tc);
      const StateVector b = SpectralPropagator(hp.approx).evolve(psi0, tc);
      SampleDiagnostics da = detail::pure_sample(), db = detail::pure_sample();
      da.norm_deviation = detail::norm_deviation(a);
      db.norm_deviation = detail::norm_deviation(b);
      hyg[idx].add(da);
      hyg[idx].add(db);
      detail::check_tail(hyg[idx], std::max(tail_mass(a), tail_mass(b)), "fidelity-closed");
      f[idx] = fidelity_pure(a, b);
      t.rows[idx] = {xs[i], ys[k], tc, f[idx]};
    });
    for (const auto& x : hyg) out.hygiene.merge(x);
    out.observables["F_c_at_t_c"] = f;
    out.details["grid"] = {{"x", kx}, {"y", ky}, {"points", t.rows.size()}};
    out.details["min_F_c_at_t_c"] = *std::min_element(f.begin(), f.end());
    out.tables.push_back(std::move(t));
    return out;
  }

  const auto cs = detail::curves(j);
  std::vector<KindOutput> per(cs.size());
  parallel_for(cs.size(), [&](std::size_t c) {
    const ModelParams p = resolve_params(s.params, cs[c].overrides);
    const DerivedParams d = effective_params(p);
    const double tc = analytic_params(d).t_c(0);
    const std::vector<double> ts = detail::time_grid(j, tc);
    const ClosedPair hp = closed_pair(d, h);
    const SpectralPropagator ue(hp.exact), ua(hp.approx);
    KindOutput& o = per[c];
    Table t;
    t.file = detail::curve_file(s, cs[c]);
    t.header = {"t_over_Delta_b", "F_c"};
    std::vector<double> f(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const StateVector a = ue.evolve(psi0, ts[i]);
      const StateVector b = ua.evolve(psi0, ts[i]);
      SampleDiagnostics da = detail::pure_sample(), db = detail::pure_sample();
      da.norm_deviation = detail::norm_deviation(a);
      db.norm_deviation = detail::norm_deviation(b);
      o.hygiene.add(da);
      o.hygiene.add(db);
      detail::check_tail(o.hygiene, std::max(tail_mass(a), tail_mass(b)), "fidelity-closed");
      f[i] = fidelity_pure(a, b);
      t.rows.push_back({ts[i], f[i]});
    }
    o.details = {{"label", cs[c].label},
                 {"file", t.file},
                 {"parameters", parameter_dump(p)},
                 {"t_c", tc},
                 {"min_F_c", *std::min_element(f.begin(), f.end())},
                 {"final_F_c", f.back()}};
    for (const auto& w : rwa_warnings(d, s.n_a - 1)) o.warnings.push_back(cs[c].label + ": " + w);
    o.observables["F_c/" + cs[c].label] = f;
    o.tables.push_back(std::move(t));
  });
  out.details["curves"] = json::array();
  for (auto& o : per) {
    out.details["curves"].push_back(o.details);
    out.hygiene.merge(o.hygiene);
    out.tables.push_back(std::move(o.tables.front()));
    out.observables.insert(o.observables.begin(), o.observables.end());
    out.warnings.insert(out.warnings.end(), o.warnings.begin(), o.warnings.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// fidelity-open: the same comparison under the transformed-frame master equation

inline MasterOptions master_options(const Scenario& s) {
  MasterOptions o;
  o.rtol = s.rtol;
  o.atol = s.atol;
  return o;
}

inline void add_all(Hygiene& h, const PropagationResult<DensityMatrix>& r) {
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    h.add(r.diagnostics[i]);
    h.max_tail_mass = std::max(h.max_tail_mass, tail_mass(r.states[i]));
  }
}

inline KindOutput run_fidelity_open(const Scenario& s, int n_b) {
  const json& j = s.raw;
  const HilbertConfig h(s.n_a, n_b);
  const DensityMatrix rho0(detail::initial_state(j, h));
  const auto cs = detail::curves(j);
  std::vector<KindOutput> per(cs.size());
  parallel_for(cs.size(), [&](std::size_t c) {
    const ModelParams p = resolve_params(s.params, cs[c].overrides);
    const DerivedParams d = effective_params(p);
    const double tc = analytic_params(d).t_c(0);
    const std::vector<double> ts = detail::time_grid(j, tc);
    const auto channels = make_channels(p, Frame::Transformed, &d);
    const ClosedPair hp = closed_pair(d, h);
    const auto re = propagate_master(rho0, hp.exact, channels, ts, master_options(s));
    const auto ra = propagate_master(rho0, hp.approx, channels, ts, master_options(s));
    KindOutput& o = per[c];
    add_all(o.hygiene, re);
    add_all(o.hygiene, ra);
    o.hygiene.degraded = o.hygiene.degraded || re.degraded || ra.degraded;
    detail::check_tail(o.hygiene, o.hygiene.max_tail_mass, "fidelity-open");
    accumulate(o.stats, re.stats);
    accumulate(o.stats, ra.stats);
    Table t;
    t.file = detail::curve_file(s, cs[c]);
    t.header = {"t_over_Delta_b", "F_o"};
    std::vector<double> f(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      f[i] = fidelity_mixed(re.states[i], ra.states[i]);
      t.rows.push_back({ts[i], f[i]});
    }
    o.details = {{"label", cs[c].label},
                 {"file", t.file},
                 {"parameters", parameter_dump(p)},
                 {"F_o_initial", f.front()},
                 {"F_o_final", f.back()},
                 {"min_F_o", *std::min_element(f.begin(), f.end())},
                 {"max_F_o", *std::max_element(f.begin(), f.end())}};
    o.observables["F_o/" + cs[c].label] = f;
    o.tables.push_back(std::move(t));
  });
  KindOutput out;
  out.details["curves"] = json::array();
  for (auto& o : per) {
    out.details["curves"].push_back(o.details);
    out.hygiene.merge(o.hygiene);
    accumulate(out.stats, o.stats);
    out.tables.push_back(std::move(o.tables.front()));
    out.observables.insert(o.observables.begin(), o.observables.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// cat-wigner / squeezed-wigner

/// Joint state evolved under H_app and the transformed-frame master equation
/// from [(|0> + |1>)|0>]/sqrt 2, projected on mode a at t_final.
struct ProjectedState {
  MeasurementOutcome<DensityMatrix> outcome;
  double t_final = 0.0;
  Hygiene hygiene;
  ode::Stats stats;
};

inline ProjectedState evolve_and_project(const ModelParams& p, const HilbertConfig& h, double t_final, Sign sign,
                                         const MasterOptions& opt, int samples = 101) {
  const DerivedParams d = effective_params(p);
  const AnalyticParams ap = analytic_params(d);
  const DensityMatrix rho0(analytic_state(0.0, ap, h));
  std::vector<double> ts(samples);
  for (int i = 0; i < samples; ++i) ts[i] = t_final * i / (samples - 1);
  ProjectedState out;
  out.t_final = t_final;
  std::optional<DensityMatrix> last;
  out.stats = propagate_master_stream(
      rho0, build_mixed_approx(d, h), make_channels(p, Frame::Transformed, &d), ts,
      [&](std::size_t i, double, const DensityMatrix& rho, const SampleDiagnostics& diag) {
        out.hygiene.add(diag, opt.limits);
        out.hygiene.max_tail_mass = std::max(out.hygiene.max_tail_mass, tail_mass(rho));
        if (i + 1 == ts.size()) last = rho;
      },
      opt);
  detail::check_tail(out.hygiene, out.hygiene.max_tail_mass, "wigner scenario");
  out.outcome = measure_mode_a(*last, sign);
  return out;
}

inline KindOutput run_wigner(const Scenario& s, int n_b) {
  const json& j = s.raw;
  const bool cat = s.kind == "cat-wigner";
  const HilbertConfig h(s.n_a, n_b);
  const ModelParams p = resolve_params(s.params);
  const DerivedParams d = effective_params(p);
  const AnalyticParams ap = analytic_params(d);
  const int k = j.value("k", 0);
  if (k < 0) throw Error(ErrorKind::InvalidInput, "'k' must be >= 0");
  const Sign sign = detail::parse_sign(j);
  const double t_final = cat ? ap.t_c(k) : ap.t_s(k);

  const ProjectedState ps =
      evolve_and_project(p, h, t_final, sign, master_options(s), j.value("time_samples", 101));
  const WignerGrid g = wigner(ps.outcome.state, detail::parse_grid(j));

  KindOutput out;
  out.hygiene = ps.hygiene;
  out.stats = ps.stats;
  Table t;
  t.file = s.name + ".csv";
  t.header = {"re_zeta", "im_zeta", "W"};
  std::vector<double> flat;
  for (int i = 0; i < g.values.rows(); ++i)
    for (int c = 0; c < g.values.cols(); ++c) {
      t.rows.push_back({g.re_axis[c], g.im_axis[i], g.values(i, c)});
      flat.push_back(g.values(i, c));
    }
  out.observables["W"] = flat;
  out.observables["probability"] = {ps.outcome.probability};

  out.details = {{"sign", sign == Sign::Plus ? "+" : "-"},
                 {"k", k},
                 {"t_final", t_final},
                 {"time_label", cat ? "t_c" : "t_s"},
                 {"alpha1", {analytic_alpha1(ap, t_final).real(), analytic_alpha1(ap, t_final).imag()}},
                 {"probability", ps.outcome.probability},
                 {"W_min", g.min()},
                 {"W_max", g.max()},
                 {"fringe_depth", std::max(0.0, -g.min())},
                 {"normalization", g.normalization},
                 {"max_imag_residue", g.max_imag_residue},
                 {"purity", purity(ps.outcome.state)}};
  if (p.kappa_a == 0.0 && p.kappa_b == 0.0) {
    // closed system: compare with the analytic components
    const CatComponents c = cat ? cat_components(ap, k, n_b) : squeezed_components(ap, k, n_b);
    const Vector& v = c.state(sign).amplitudes;
    const double overlap = (v.adjoint() * ps.outcome.state.matrix * v)(0, 0).real();
    out.details["analytic"] = {{"probability", c.probability(sign)},
                               {"fidelity", std::sqrt(std::max(0.0, overlap))},
                               {"abs_alpha1", std::abs(c.alpha1)}};
  }
  for (const auto& w : rwa_warnings(d, s.n_a - 1)) out.warnings.push_back(w);
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------
// flow-check

inline KindOutput run_flow_check(const Scenario& s) {
  const json& j = s.raw;
  const ModelParams p = resolve_params(s.params);
  const FlowState fp = flow_fixed_point(p);
  const json pert = j.value("perturbation", json::object());
  FlowState s0 = fp;
  s0.r += pert.value("r", 0.0);
  s0.phi += pert.value("phi", 0.0);
  s0.alpha += cplx(pert.value("alpha_re", 0.0), pert.value("alpha_im", 0.0));
  const double horizon = detail::number(j.at("horizon"), "horizon");
  const int samples = j.value("samples", 401);
  const double tol = j.value("tolerance", 1e-6);
  const FlowTrajectory tr = flow_integrate(s0, p, horizon, std::min(1e-10, s.rtol), samples);

  KindOutput out;
  out.stats = tr.stats;
  Table t;
  t.file = s.name + ".csv";
  t.header = {"t_over_Delta_b", "r", "phi_rad", "re_alpha", "im_alpha"};
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const FlowState& x = tr.states[i];
    t.rows.push_back({tr.times[i], x.r, x.phi, x.alpha.real(), x.alpha.imag()});
  }
  const FlowDerivative at = flow_rhs(fp, p);
  const bool converged = tr.terminal_r_error < tol && tr.terminal_phi_error < tol && tr.terminal_alpha_error < tol;
  out.details = {{"fixed_point", {{"r", fp.r}, {"phi", fp.phi}, {"alpha_re", fp.alpha.real()},
                                  {"alpha_im", fp.alpha.imag()}}},
                 {"rhs_at_fixed_point", {{"dr", at.dr}, {"dphi", at.dphi}, {"abs_dalpha", std::abs(at.dalpha)}}},
                 {"terminal_r_error", tr.terminal_r_error},
                 {"terminal_phi_error", tr.terminal_phi_error},
                 {"terminal_alpha_error", tr.terminal_alpha_error},
                 {"tolerance", tol},
                 {"converged", converged}};
  if (!converged) out.warnings.push_back("flow did not reach the fixed point within tolerance");
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------------

inline KindOutput run_kind(const Scenario& s, int n_b);

inline double max_change(const std::map<std::string, std::vector<double>>& a,
                         const std::map<std::string, std::vector<double>>& b) {
  double worst = 0.0;
  for (const auto& [key, va] : a) {
    const auto it = b.find(key);
    if (it == b.end() || it->second.size() != va.size())
      throw Error(ErrorKind::NumericError, "observable '" + key + "' missing from comparison run");
    for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va[i] - it->second[i]));
  }
  return worst;
}

inline KindOutput run_convergence(const Scenario& s) {
  const json& j = s.raw;
  json target = j.at("target");
  if (!target.contains("name")) target["name"] = s.name;
  const Scenario inner = parse_scenario(target);
  if (!uses_cutoff(inner.kind)) throw Error(ErrorKind::InvalidInput, "convergence target must depend on the cutoff");
  std::vector<int> nbs;
  for (const auto& v : j.at("n_b_values")) nbs.push_back(detail::integer(v, "n_b_values"));
  if (nbs.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least two n_b values");
  std::sort(nbs.begin(), nbs.end());

  std::vector<KindOutput> runs;
  for (int nb : nbs) runs.push_back(run_kind(inner, nb));
  KindOutput out;
  Table t;
  t.file = s.name + ".csv";
  t.header = {"n_b", "max_abs_change_vs_largest"};
  std::vector<double> changes;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    changes.push_back(max_change(runs[i].observables, runs.back().observables));
    t.rows.push_back({static_cast<double>(nbs[i]), changes.back()});
    out.hygiene.merge(runs[i].hygiene);
    accumulate(out.stats, runs[i].stats);
  }
  out.details = {{"target_kind", inner.kind}, {"n_b_values", nbs}, {"max_abs_change_vs_largest", changes}};
  out.tables.push_back(std::move(t));
  return out;
}

inline KindOutput run_kind(const Scenario& s, int n_b) {
  if (s.kind == "param-sweep") return run_param_sweep(s);
  if (s.kind == "fidelity-closed") return run_fidelity_closed(s, n_b);
  if (s.kind == "fidelity-open") return run_fidelity_open(s, n_b);
  if (s.kind == "cat-wigner" || s.kind == "squeezed-wigner") return run_wigner(s, n_b);
  if (s.kind == "flow-check") return run_flow_check(s);
  if (s.kind == "convergence") return run_convergence(s);
  throw Error(ErrorKind::InvalidInput, "unknown scenario kind '" + s.kind + "'");
}

// ---------------------------------------------------------------------------

struct RunOptions {
  std::optional<int> n_b;
  std::optional<double> tol;  // integrator relative tolerance; atol follows at tol / 100
};

struct RunReport {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest_path;
  json manifest;
  KindOutput output;
};

inline Scenario apply_options(Scenario s, const RunOptions& opt) {
  if (opt.n_b) {
    s.n_b = *opt.n_b;
    HilbertConfig(s.n_a, s.n_b);
  }
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw Error(ErrorKind::InvalidInput, "--tol must be > 0");
    s.rtol = *opt.tol;
    s.atol = *opt.tol * 1e-2;
  }
  return s;
}

/// Runs the scenario, re-runs it at n_b + delta for cutoff-dependent kinds,
/// and writes one CSV per table plus <name>.manifest.json into out_dir.
inline RunReport run(const Scenario& scenario, const std::filesystem::path& out_dir, const RunOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  const Scenario s = apply_options(scenario, opt);
  RunReport rep;
  rep.output = run_kind(s, s.n_b);

  json conv;
  if (uses_cutoff(s.kind) && s.convergence_delta_n_b > 0) {
    const int nb2 = s.n_b + s.convergence_delta_n_b;
    const KindOutput again = run_kind(s, nb2);
    const double change = max_change(rep.output.observables, again.observables);
    conv = {{"n_b", s.n_b},
            {"n_b_rerun", nb2},
            {"max_observable_change", change},
            {"tolerance", s.convergence_tolerance},
            {"converged", change <= s.convergence_tolerance}};
    if (change > s.convergence_tolerance)
      rep.output.warnings.push_back("not converged in n_b: observables moved by " + format_number(change));
  } else {
    conv = {{"applicable", false}};
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw Error(ErrorKind::InvalidInput, "cannot create output directory '" + out_dir.string() + "'");
  for (const auto& t : rep.output.tables) {
    const auto path = out_dir / t.file;
    write_text(path, csv_text(t));
    rep.files.push_back(path);
  }

  json& m = rep.manifest;
  m["artifact_version"] = MIXEDOPT_VERSION;
  m["scenario"] = s.raw;
  m["effective"] = {{"n_a", s.n_a}, {"n_b", s.n_b}, {"rtol", s.rtol}, {"atol", s.atol},
                    {"threads", worker_count()}};
  if (s.kind != "convergence") {
    try {
      m["parameters"] = parameter_dump(resolve_params(s.params));
    } catch (const Error& e) {
      m["parameters"] = {{"unavailable", e.what()}};  // sweeps may leave the base point incomplete
    }
  }
  m["results"] = rep.output.details;
  m["hygiene"] = to_json(rep.output.hygiene);
  m["integrator"] = to_json(rep.output.stats);
  m["convergence"] = conv;
  m["files"] = json::array();
  for (const auto& f : rep.files) m["files"].push_back(f.filename().string());
  m["warnings"] = rep.output.warnings;
  m["degraded"] = rep.output.hygiene.degraded;
  m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.manifest_path = out_dir / (s.name + ".manifest.json");
  write_text(rep.manifest_path, m.dump(2) + "\n");
  return rep;
}

}  // namespace mixedopt::cli
