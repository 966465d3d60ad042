#pragma once

// Stationary squeezing/displacement of the driven cross-Kerr model and the
// effective mixed-optomechanical parameters that follow from it.
//
// All frequencies are in units of the detuning Delta_b unless a caller
// chooses otherwise; nothing here assumes Delta_b = 1.

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <vector>

#include "mixedopt/error.hpp"
#include "mixedopt/fock.hpp"
#include "mixedopt/ode.hpp"

namespace mixedopt {

struct ModelParams {
  double delta_b = 1.0;   // single-excitation detuning
  double chi = 0.0;       // cross-Kerr strength
  double eps = 0.0;       // single-excitation drive amplitude
  double theta_d = 0.0;   // its phase
  double omega_p2 = 0.0;  // two-excitation drive amplitude
  double theta_p = kPi;   // its phase
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  double n_th = 0.0;  // thermal occupation of mode a
  double r_e = 0.0;   // bath squeezing
  double theta_e = 0.0;

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(finite(delta_b) && finite(chi) && finite(eps) && finite(theta_d) && finite(omega_p2) &&
          finite(theta_p) && finite(kappa_a) && finite(kappa_b) && finite(n_th) && finite(r_e) &&
          finite(theta_e)))
      throw Error(ErrorKind::InvalidInput, "model parameters must be finite");
    if (delta_b <= 0.0) throw Error(ErrorKind::InvalidInput, "delta_b must be > 0 (red detuning)");
    if (kappa_a < 0.0 || kappa_b < 0.0) throw Error(ErrorKind::InvalidInput, "decay rates must be >= 0");
    if (n_th < 0.0) throw Error(ErrorKind::InvalidInput, "n_th must be >= 0");
    if (r_e < 0.0) throw Error(ErrorKind::InvalidInput, "r_e must be >= 0");
    if (omega_p2 < 0.0) throw Error(ErrorKind::InvalidInput, "omega_p2 must be >= 0");
  }
};

struct DerivedParams {
  double r = 0.0;
  double phi = kPi;
  double alpha_ss = 0.0;
  double theta_d_required = 0.0;
  double omega_a_eff = 0.0;
  double omega_a_eff_prime = 0.0;
  double omega_b_eff = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double g2p = 0.0;
  double n_ss = 0.0;
  cplx m_ss{0.0, 0.0};
};

struct AnalyticParams {
  double eta1 = 0.0;
  double beta1 = 0.0;
  double varpi1 = 0.0;
  double eps10 = 0.0;

  /// Coherent-component times (2k+1) pi / varpi1.
  double t_c(int k = 0) const { return (2 * k + 1) * kPi / varpi1; }
  /// Maximal-squeezing times (2k+1) pi / (2 varpi1).
  double t_s(int k = 0) const { return (2 * k + 1) * kPi / (2.0 * varpi1); }
};

struct FlowState {
  double r = 0.0;
  double phi = kPi;
  cplx alpha{0.0, 0.0};
};

struct FlowDerivative {
  double dr = 0.0;
  double dphi = 0.0;
  cplx dalpha{0.0, 0.0};
};

// ---------------------------------------------------------------------------

namespace detail {
inline void require_stationary_phase(const ModelParams& p) {
  if (std::abs(std::remainder(p.theta_p - kPi, 2.0 * kPi)) > 1e-12)
    throw Error(ErrorKind::InvalidInput, "stationary solution requires theta_p = pi");
}
}  // namespace detail

/// r = 1/4 ln[(Delta_b + 2 Omega_p) / (Delta_b - 2 Omega_p)]
inline double stationary_r(const ModelParams& p) {
  detail::require_stationary_phase(p);
  if (p.omega_p2 < 0.0) throw Error(ErrorKind::InvalidInput, "omega_p2 must be >= 0");
  if (p.delta_b <= 2.0 * p.omega_p2)
    throw Error(ErrorKind::OutsideStationaryDomain, "requires delta_b > 2 omega_p2");
  return 0.25 * std::log((p.delta_b + 2.0 * p.omega_p2) / (p.delta_b - 2.0 * p.omega_p2));
}

struct SteadyDisplacement {
  double alpha_ss = 0.0;
  /// Drive phase with tan(theta_d) = kappa_b / [2 (Delta_b - 2 Omega_p)].
  double theta_d_required = 0.0;
};

inline SteadyDisplacement steady_alpha(const ModelParams& p, double r) {
  const double detune = p.delta_b - 2.0 * p.omega_p2;
  const double denom2 = detune * detune + 0.25 * p.kappa_b * p.kappa_b;
  if (!(denom2 > 0.0))
    throw Error(ErrorKind::SingularDisplacement, "delta_b = 2 omega_p2 with kappa_b = 0");
  return {p.eps * std::exp(-r) / std::sqrt(denom2), std::atan2(0.5 * p.kappa_b, detune)};
}

/// Drive amplitude whose real part Re[eps e^{i theta_d}] is fixed while
/// theta_d takes the value that makes alpha_ss real. Keeps alpha_ss (and g1)
/// independent of kappa_b.
inline ModelParams with_drive_real_part(ModelParams p, double eps_re) {
  const double th = steady_alpha(p, 0.0).theta_d_required;
  p.theta_d = th;
  p.eps = eps_re / std::cos(th);
  return p;
}

struct BathParams {
  double n = 0.0;
  cplx m{0.0, 0.0};
};

/// Effective occupation and two-photon correlation of the squeezed bath seen
/// in the frame squeezed by zeta = r e^{i phi}.
inline BathParams bath_params(double r_e, double theta_e, double r, double phi) {
  const double c2 = std::pow(std::cos(0.5 * (phi - theta_e)), 2);
  const double s2 = std::pow(std::sin(0.5 * (phi - theta_e)), 2);
  const cplx ph = std::exp(-kI * phi);
  BathParams b;
  b.n = std::pow(std::sinh(r_e - r), 2) +
        0.5 * c2 * (std::cosh(2.0 * (r_e + r)) - std::cosh(2.0 * (r_e - r)));
  b.m = 0.5 * ph * std::sinh(2.0 * (r_e + r)) * c2 - 0.5 * ph * std::sinh(2.0 * (r_e - r)) * s2 +
        0.5 * kI * ph * std::sin(phi - theta_e) * std::sinh(2.0 * r_e);
  return b;
}

/// phi = pi specialization, written out separately.
inline BathParams bath_params_stationary(double r_e, double theta_e, double r) {
  const double c2 = std::pow(std::cos(0.5 * theta_e), 2);
  const double s2 = std::pow(std::sin(0.5 * theta_e), 2);
  BathParams b;
  b.n = 0.5 * (std::cosh(2.0 * (r_e + r)) - std::cosh(2.0 * (r_e - r))) * s2 +
        std::pow(std::sinh(r_e - r), 2);
  b.m = 0.5 * (std::sinh(2.0 * (r_e - r)) * c2 - std::sinh(2.0 * (r_e + r)) * s2) -
        0.5 * kI * std::sin(theta_e) * std::sinh(2.0 * r_e);
  return b;
}

/// Squeezed-vacuum bath in the untransformed frame.
inline BathParams bath_params_original(double r_e, double theta_e) {
  return {std::pow(std::sinh(r_e), 2), std::cosh(r_e) * std::sinh(r_e) * std::exp(-kI * theta_e)};
}

/// (Delta_b - 2 Omega_p) e^{2r}
inline double omega_b_eff_exponential(double delta_b, double omega_p2, double r) {
  return (delta_b - 2.0 * omega_p2) * std::exp(2.0 * r);
}

/// Delta_b cosh 2r - 2 Omega_p cos(theta_p + phi) sinh 2r, the static part of the
/// general effective frequency.
inline double omega_b_eff_hyperbolic(double delta_b, double omega_p2, double r, double theta_p = kPi,
                                     double phi = kPi) {
  return delta_b * std::cosh(2.0 * r) - 2.0 * omega_p2 * std::cos(theta_p + phi) * std::sinh(2.0 * r);
}

/// Delta_b - 2 Omega_p tanh r. Equal to the two forms above whenever r is the
/// stationary value, since tanh 2r = 2 Omega_p / Delta_b there.
inline double omega_b_eff_tanh(double delta_b, double omega_p2, double r) {
  return delta_b - 2.0 * omega_p2 * std::tanh(r);
}

inline DerivedParams effective_params(const ModelParams& p) {
  p.validate();
  DerivedParams d;
  d.r = stationary_r(p);
  d.phi = kPi;
  const auto sd = steady_alpha(p, d.r);
  d.alpha_ss = sd.alpha_ss;
  d.theta_d_required = sd.theta_d_required;
  const double e2r = std::exp(2.0 * d.r);
  d.g1 = p.chi * e2r * d.alpha_ss;
  d.g2 = 0.25 * p.chi * e2r;
  d.g2p = 0.25 * p.chi / e2r;
  d.omega_a_eff = -0.5 * p.chi + p.chi * d.alpha_ss * d.alpha_ss * e2r;
  d.omega_a_eff_prime = d.omega_a_eff + d.g2p;
  d.omega_b_eff = omega_b_eff_exponential(p.delta_b, p.omega_p2, d.r);
  const auto bath = bath_params_stationary(p.r_e, p.theta_e, d.r);
  d.n_ss = bath.n;
  d.m_ss = bath.m;
  return d;
}

inline AnalyticParams analytic_params(const DerivedParams& d) {
  if (!(d.omega_b_eff > 0.0)) throw Error(ErrorKind::InvalidInput, "omega_b_eff must be > 0");
  AnalyticParams a;
  const double wb = d.omega_b_eff;
  a.eta1 = 0.25 * std::log((wb + 4.0 * d.g2) / wb);
  a.beta1 = -d.g1 * std::exp(-3.0 * a.eta1) / wb;
  a.varpi1 = std::exp(2.0 * a.eta1) * wb;
  a.eps10 = d.omega_a_eff_prime - d.g1 * d.g1 * std::exp(-4.0 * a.eta1) / wb + 0.5 * (a.varpi1 - wb);
  return a;
}

// ---------------------------------------------------------------------------
// Flow of the squeezing and displacement parameters

inline FlowDerivative flow_rhs(const FlowState& s, const ModelParams& p) {
  if (!(s.r > 0.0)) throw Error(ErrorKind::CothSingularity, "flow requires r > 0");
  FlowDerivative d;
  const double tp = p.theta_p + s.phi;
  d.dr = 2.0 * p.omega_p2 * std::sin(tp);
  d.dphi = 4.0 * p.omega_p2 / std::tanh(2.0 * s.r) * std::cos(tp) - 2.0 * p.delta_b;
  const double freq = p.delta_b * std::cosh(2.0 * s.r) - 2.0 * p.omega_p2 * std::cos(tp) * std::sinh(2.0 * s.r) +
                      d.dphi * std::pow(std::sinh(s.r), 2);
  const cplx drive = p.eps * (std::exp(-kI * p.theta_d) * std::cosh(s.r) -
                              std::exp(kI * (p.theta_d + s.phi)) * std::sinh(s.r));
  d.dalpha = -0.5 * p.kappa_b * s.alpha - kI * freq * s.alpha - kI * drive;
  return d;
}

/// Stationary point of the flow: r from the stationary formula, phi = pi and
/// alpha solving d(alpha)/dt = 0 for the actual drive phase theta_d.
inline FlowState flow_fixed_point(const ModelParams& p) {
  FlowState s;
  s.r = stationary_r(p);
  s.phi = kPi;
  s.alpha = 0.0;
  const FlowDerivative at_zero = flow_rhs(s, p);  // = -i * drive
  const double freq = omega_b_eff_hyperbolic(p.delta_b, p.omega_p2, s.r, p.theta_p, s.phi) +
                      at_zero.dphi * std::pow(std::sinh(s.r), 2);
  s.alpha = at_zero.dalpha / (0.5 * p.kappa_b + kI * freq);
  return s;
}

struct FlowTrajectory {
  std::vector<double> times;
  std::vector<FlowState> states;
  ode::Stats stats;
  FlowState fixed_point;
  double terminal_r_error = 0.0;
  double terminal_phi_error = 0.0;
  double terminal_alpha_error = 0.0;
};

/// Adaptive integration of (r, phi, alpha) over [0, horizon] with n_samples
/// evenly spaced outputs.
inline FlowTrajectory flow_integrate(const FlowState& s0, const ModelParams& p, double horizon,
                                     double tol = 1e-10, int n_samples = 201) {
  if (!(s0.r > 0.0)) throw Error(ErrorKind::CothSingularity, "flow requires r(0) > 0");
  if (!(horizon > 0.0) || n_samples < 2) throw Error(ErrorKind::InvalidInput, "bad flow horizon");
  using V4 = Eigen::Vector4d;
  auto pack = [](const FlowState& s) { return V4(s.r, s.phi, s.alpha.real(), s.alpha.imag()); };
  auto unpack = [](const V4& v) { return FlowState{v(0), v(1), cplx(v(2), v(3))}; };

  FlowTrajectory out;
  out.times.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) out.times[i] = horizon * i / (n_samples - 1);
  out.states.resize(n_samples);

  ode::Options opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  opt.failure_kind = ErrorKind::StiffFailure;
  // Near the fixed point all derivatives vanish and the controller would take
  // steps far outside the stability region of the (r, phi) oscillation.
  const double fastest = p.delta_b * std::cosh(2.0 * s0.r) + 2.0 * p.omega_p2 * std::sinh(2.0 * s0.r) +
                         4.0 * p.omega_p2 / std::tanh(2.0 * s0.r);
  opt.h_max = 0.1 * 2.0 * kPi / fastest;
  auto rhs = [&](double, const V4& v) -> V4 {
    const auto d = flow_rhs(unpack(v), p);
    return V4(d.dr, d.dphi, d.dalpha.real(), d.dalpha.imag());
  };
  out.stats = ode::integrate(rhs, pack(s0), 0.0, std::span<const double>(out.times),
                             [&](std::size_t i, double, const V4& v) { out.states[i] = unpack(v); },
                             opt);

  out.fixed_point = flow_fixed_point(p);
  const FlowState& last = out.states.back();
  out.terminal_r_error = std::abs(last.r - out.fixed_point.r);
  out.terminal_phi_error = std::abs(std::remainder(last.phi - out.fixed_point.phi, 2.0 * kPi));
  out.terminal_alpha_error = std::abs(last.alpha - out.fixed_point.alpha);
  return out;
}

}  // namespace mixedopt
