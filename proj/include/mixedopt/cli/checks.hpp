#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mixedopt/analytic.hpp"
#include "mixedopt/cli/output.hpp"
#include "mixedopt/evolve.hpp"
#include "mixedopt/hamiltonians.hpp"
#include "mixedopt/params.hpp"
#include "mixedopt/tomography.hpp"

namespace mixedopt::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

/// Cat-figure point: chi = 0.01, Omega_p = 0.49, Re[eps e^{i theta_d}] = eps_re.
inline ModelParams cat_params(double eps_re = 0.3, double kappa_a = 0.0, double kappa_b = 0.0) {
  ModelParams p;
  p.chi = 0.01;
  p.omega_p2 = 0.49;
  p.kappa_a = kappa_a;
  p.kappa_b = kappa_b;
  p = with_drive_real_part(p, eps_re);
  p.r_e = stationary_r(p);
  return p;
}

}  // namespace detail

inline std::vector<CheckResult> check_params() {
  const DerivedParams d5 = effective_params(detail::cat_params(0.3));
  const DerivedParams d6 = effective_params(detail::cat_params(0.38));
  const double g1_5 = d5.g1 / d5.omega_b_eff, g2_5 = d5.g2 / d5.omega_b_eff, g1_6 = d6.g1 / d6.omega_b_eff;
  return {{"g1/omega_b at eps_re=0.3", std::abs(g1_5 - 2.378) < 5e-3, detail::fmt("%.6f (target 2.378 +- 5e-3)", g1_5)},
          {"g2/omega_b at eps_re=0.3", std::abs(g2_5 - 0.125) < 1e-12,
           detail::fmt("%.15f (target 0.125 +- 1e-12)", g2_5)},
          {"g1/omega_b at eps_re=0.38", std::abs(g1_6 - 3.012) < 5e-3, detail::fmt("%.6f (target 3.012 +- 5e-3)", g1_6)}};
}

inline std::vector<CheckResult> check_bath(int samples = 100) {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = u(rng);
    const BathParams b = bath_params_stationary(r, 0.0, r);
    worst = std::max({worst, std::abs(b.n), std::abs(b.m)});
  }
  return {{"N_ss, M_ss vanish at r_e=r, theta_e=0", worst < 1e-14,
           detail::fmt("max |N_ss|, |M_ss| = %.3g over %.0f values of r", worst, samples)}};
}

/// Eigenvalues of the transformed Hamiltonian plus its c-number offset against
/// the rotating-frame Hamiltonian, 10 lowest levels of blocks n_a = 0, 1, 2.
inline std::vector<CheckResult> check_spectrum() {
  struct Case {
    double chi, omega_p2, eps;
    int n_b;
  };
  std::vector<CheckResult> out;
  for (const Case c : {Case{0.05, 0.45, 0.01, 90}, Case{0.01, 0.3, 0.05, 80}, Case{0.02, 0.4, 0.02, 80}}) {
    ModelParams p;
    p.chi = c.chi;
    p.omega_p2 = c.omega_p2;
    p.eps = c.eps;
    const HilbertConfig h(3, c.n_b);
    const auto t = build_transformed(p, flow_fixed_point(p), h);
    const Operator hi = build_exact_rotating(p, h);
    double worst = 0.0;
    for (int ka = 0; ka < 3; ++ka) {
      auto eig = [&](const Operator& H) {
        const Matrix blk = H.matrix.block(ka * h.n_b, ka * h.n_b, h.n_b, h.n_b);
        return Eigen::SelfAdjointEigenSolver<Matrix>(blk, Eigen::EigenvaluesOnly).eigenvalues();
      };
      const Eigen::VectorXd e1 = eig(hi);
      const Eigen::VectorXd e2 = eig(t.hamiltonian).array() + t.c_offset;
      for (int k = 0; k < 10; ++k)
        worst = std::max(worst, std::abs(e1(k) - e2(k)) / std::max(std::abs(e1(k)), t.omega_b_eff));
    }
    out.push_back({detail::fmt("spectrum chi=%.2f Omega_p=%.2f eps=%.2f", c.chi, c.omega_p2, c.eps), worst < 1e-3,
                   detail::fmt("max relative deviation %.3g (limit 1e-3), n_b=%.0f", worst, c.n_b)});
  }
  return out;
}

inline std::vector<CheckResult> check_analytic(int n_b = 80) {
  const DerivedParams d = effective_params(detail::cat_params(0.3));
  const AnalyticParams ap = analytic_params(d);
  const HilbertConfig h(2, n_b);
  std::vector<double> ts;
  for (int i = 0; i < 50; ++i) ts.push_back(2.0 * ap.t_c(0) * i / 49);
  const auto res = propagate_schrodinger(analytic_state(0.0, ap, h), build_mixed_approx(d, h), ts);
  double worst = 1.0;
  for (std::size_t i = 0; i < ts.size(); ++i)
    worst = std::min(worst, std::abs(analytic_state(ts[i], ap, h).amplitudes.dot(res.states[i].amplitudes)));
  return {{"analytic state vs H_app propagation", worst >= 1.0 - 1e-6,
           detail::fmt("min overlap %.12f at 50 times in [0, 2 t_c], n_b=%.0f", worst, n_b)}};
}

/// Master equation with no decay against the Schrodinger equation.
inline std::vector<CheckResult> check_closed_limit(int n_b = 40) {
  const ModelParams p = detail::cat_params(0.3);
  const DerivedParams d = effective_params(p);
  const AnalyticParams ap = analytic_params(d);
  const HilbertConfig h(2, n_b);
  const StateVector psi0 = analytic_state(0.0, ap, h);
  const Operator H = build_mixed_approx(d, h);
  std::vector<double> ts;
  for (int i = 0; i < 21; ++i) ts.push_back(ap.t_c(0) * i / 20);
  MasterOptions mo;
  mo.rtol = 1e-11;
  mo.atol = 1e-13;
  const auto rm = propagate_master(DensityMatrix(psi0), H, make_channels(p, Frame::Transformed, &d), ts, mo);
  const auto rs = propagate_schrodinger(psi0, H, ts);
  double worst = 0.0;
  Hygiene hy;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    worst = std::max(worst, mixedopt::detail::max_abs(rm.states[i].matrix - DensityMatrix(rs.states[i]).matrix));
    hy.add(rm.diagnostics[i]);
  }
  return {{"closed-limit master vs Schrodinger", worst < 1e-7,
           detail::fmt("max |rho_master - |psi><psi|| = %.3g (limit 1e-7)", worst)},
          {"closed-limit hygiene", !hy.degraded && !rm.degraded,
           detail::fmt("trace %.3g, hermiticity %.3g, min eigenvalue %.3g", hy.max_trace_deviation,
                       hy.max_hermiticity_deviation, hy.min_eigenvalue)}};
}

/// Trace, Hermiticity and positivity along open-system runs in both frames.
inline std::vector<CheckResult> check_trace(int n_b = 40) {
  std::vector<CheckResult> out;
  struct Case {
    const char* label;
    Frame frame;
    double kappa_b, r_e_shift;
  };
  for (const Case c : {Case{"transformed frame, kappa_b=0.5", Frame::Transformed, 0.5, 0.0},
                       Case{"transformed frame, squeezed residual bath", Frame::Transformed, 0.1, 0.3},
                       Case{"original frame, squeezed bath", Frame::Original, 0.1, 0.0}}) {
    ModelParams p = detail::cat_params(0.3, 0.02, c.kappa_b);
    p.r_e = std::max(0.0, p.r_e - c.r_e_shift);
    p.n_th = 0.1;
    const DerivedParams d = effective_params(p);
    const AnalyticParams ap = analytic_params(d);
    const HilbertConfig h(3, n_b);
    std::vector<double> ts;
    for (int i = 0; i < 41; ++i) ts.push_back(ap.t_c(0) * i / 40);
    const auto rm = propagate_master(DensityMatrix(analytic_state(0.0, ap, h)), build_mixed_approx(d, h),
                                     make_channels(p, c.frame, &d), ts);
    Hygiene hy;
    for (const auto& diag : rm.diagnostics) hy.add(diag);
    out.push_back({std::string("hygiene: ") + c.label, !hy.degraded && !rm.degraded,
                   detail::fmt("trace %.3g, hermiticity %.3g, min eigenvalue %.3g", hy.max_trace_deviation,
                               hy.max_hermiticity_deviation, hy.min_eigenvalue)});
  }
  return out;
}

/// Flow from perturbed displacements relaxes onto the fixed point for
/// kappa_b = 0.02; the (r, phi) derivatives vanish there.
inline std::vector<CheckResult> check_flow() {
  std::vector<CheckResult> out;
  struct Case {
    double eps_re;
    cplx kick;
  };
  for (const Case c : {Case{0.3, cplx(0.5, -0.3)}, Case{0.38, cplx(-1.0, 0.7)}, Case{0.05, cplx(0.2, 0.2)}}) {
    const ModelParams p = detail::cat_params(c.eps_re, 0.02, 0.02);
    const FlowState fp = flow_fixed_point(p);
    const FlowDerivative at = flow_rhs(fp, p);
    FlowState s0 = fp;
    s0.alpha += c.kick;
    const FlowTrajectory tr = flow_integrate(s0, p, 2000.0, 1e-10, 201);
    const double err = std::max({tr.terminal_r_error, tr.terminal_phi_error, tr.terminal_alpha_error});
    out.push_back({detail::fmt("flow fixed point eps_re=%.2f", c.eps_re), err < 1e-6,
                   detail::fmt("terminal distance %.3g (limit 1e-6), |alpha*| = %.6f", err, std::abs(fp.alpha))});
    const bool zero = std::abs(at.dr) < 1e-12 && std::abs(at.dphi) < 1e-12 && std::abs(at.dalpha) < 1e-12;
    out.push_back({detail::fmt("flow derivatives vanish at fixed point eps_re=%.2f", c.eps_re), zero,
                   detail::fmt("dr=%.3g dphi=%.3g |dalpha|=%.3g", at.dr, at.dphi, std::abs(at.dalpha))});
  }
  return out;
}

/// Cat components at t_c and the Wigner negativity of both outcomes.
inline std::vector<CheckResult> check_cat(int n_b = 60) {
  const AnalyticParams ap = analytic_params(effective_params(detail::cat_params(0.3)));
  const CatComponents c = cat_components(ap, 0, n_b);
  const double a = std::abs(c.alpha1);
  std::vector<CheckResult> out = {
      {"|alpha1(t_c)|", std::abs(a - 3.171) < 1e-3, detail::fmt("%.6f (target 3.171 +- 1e-3)", a)},
      {"P+ + P- = 1", std::abs(c.p_plus + c.p_minus - 1.0) < 1e-12,
       detail::fmt("P+ = %.12f, P- = %.12f", c.p_plus, c.p_minus)}};
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const WignerGrid g = wigner(c.state(s));
    out.push_back({s == Sign::Plus ? "min W+ < -0.1" : "min W- < -0.1", g.min() < -0.1,
                   detail::fmt("min W = %.6f on the default grid, normalization %.6f", g.min(), g.normalization)});
  }
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> n = {"params",      "bath",  "spectrum", "analytic", "closed-limit",
                                             "trace",       "flow",  "cat",      "all"};
  return n;
}

inline std::vector<CheckResult> run_suite(const std::string& name) {
  if (name == "params") return check_params();
  if (name == "bath") return check_bath();
  if (name == "spectrum") return check_spectrum();
  if (name == "analytic") return check_analytic();
  if (name == "closed-limit") return check_closed_limit();
  if (name == "trace") return check_trace();
  if (name == "flow") return check_flow();
  if (name == "cat") return check_cat();
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const auto& n : suite_names())
      if (n != "all") {
        auto r = run_suite(n);
        all.insert(all.end(), r.begin(), r.end());
      }
    return all;
  }
  throw Error(ErrorKind::UnknownSuite, "unknown suite '" + name + "'");
}

}  // namespace mixedopt::cli
