#pragma once

// Hamiltonians of the driven cross-Kerr model on a truncated two-mode space:
// the rotating-frame model, its squeezed/displaced transform, and the
// mixed and quadratic optomechanical approximations.

#include <string>
#include <vector>

#include "mixedopt/fock.hpp"
#include "mixedopt/params.hpp"

namespace mixedopt {

enum class HamiltonianKind {
  ExactRotating,
  TransformedGeneral,
  TransformedStationary,
  MixedApprox,
  QuadraticApprox,
};

inline std::string to_string(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::ExactRotating: return "exact-rotating";
    case HamiltonianKind::TransformedGeneral: return "transformed-general";
    case HamiltonianKind::TransformedStationary: return "transformed-stationary";
    case HamiltonianKind::MixedApprox: return "mixed-approx";
    case HamiltonianKind::QuadraticApprox: return "quadratic-approx";
  }
  return "?";
}

namespace detail {

/// Mode-b building blocks lifted to the joint space.
struct JointOps {
  Operator na;  // a^dag a (x) I
  Operator nb;  // I (x) b^dag b
  Operator b;   // I (x) b
  Operator bd;  // I (x) b^dag

  explicit JointOps(const HilbertConfig& h)
      : na(embed_a(number(h.n_a, Space::ModeA), h.n_b)),
        nb(embed_b(h.n_a, number(h.n_b))),
        b(embed_b(h.n_a, annihilator(h.n_b))),
        bd(b.adjoint()) {}
};

/// n_a (x) O_b, built as a Kronecker product so the joint matrix is exact.
inline Operator na_times(const HilbertConfig& h, const Operator& op_b) {
  return tensor(number(h.n_a, Space::ModeA), op_b);
}

}  // namespace detail

/// Delta_b b^dag b + chi a^dag a b^dag b + eps (e^{-i theta_d} b^dag + h.c.)
///   + Omega_p (e^{-i theta_p} b^dag^2 + h.c.)
inline Operator build_exact_rotating(const ModelParams& p, const HilbertConfig& h) {
  const detail::JointOps o(h);
  const cplx drive = p.eps * std::exp(-kI * p.theta_d);
  const cplx pump = p.omega_p2 * std::exp(-kI * p.theta_p);
  return p.delta_b * o.nb + p.chi * (o.na * o.nb) + drive * o.bd + std::conj(drive) * o.b +
         pump * (o.bd * o.bd) + std::conj(pump) * (o.b * o.b);
}

struct TransformedHamiltonian {
  Operator hamiltonian;
  /// c-number dropped from the transformed Hamiltonian: for the static frame
  /// U = S(r e^{i phi}) D(alpha), U^dag H_I U = H' + c_offset at a fixed point.
  double c_offset = 0.0;
  double omega_a_eff = 0.0;
  double omega_b_eff = 0.0;
};

/// Transformed Hamiltonian for an arbitrary point (r, phi, alpha) of the flow.
/// The effective mode-b frequency includes the phi-dot sinh^2 r frame term.
inline TransformedHamiltonian build_transformed(const ModelParams& p, const FlowState& s,
                                                const HilbertConfig& h) {
  const double r = s.r;
  const double e2r = std::exp(2.0 * r);
  const cplx z = s.alpha * std::exp(-0.5 * kI * s.phi);
  const double x = z.real();
  const double y = z.imag();
  const double tp = p.theta_p + s.phi;

  // phi-dot sinh^2 r, using sinh^2 r / tanh 2r = tanh r cosh 2r / 2 so r = 0 is regular
  const double phidot_s2 = 2.0 * p.omega_p2 * std::cos(tp) * std::tanh(r) * std::cosh(2.0 * r) -
                           2.0 * p.delta_b * std::pow(std::sinh(r), 2);

  TransformedHamiltonian out;
  out.omega_a_eff = p.chi * (x * x / e2r + y * y * e2r) - 0.5 * p.chi;
  out.omega_b_eff = p.delta_b * std::cosh(2.0 * r) - 2.0 * p.omega_p2 * std::cos(tp) * std::sinh(2.0 * r) +
                    phidot_s2;

  const Operator b = annihilator(h.n_b);
  const Operator bd = b.adjoint();
  const cplx ph = std::exp(0.5 * kI * s.phi);
  const Operator xp = ph * bd + std::conj(ph) * b;
  const Operator xm = ph * bd - std::conj(ph) * b;

  const Operator coupling = (x * p.chi / e2r) * xp + (kI * y * p.chi * e2r) * xm +
                            (0.25 * p.chi / e2r) * (xp * xp) - (0.25 * p.chi * e2r) * (xm * xm);
  const detail::JointOps o(h);
  out.hamiltonian = out.omega_a_eff * o.na + out.omega_b_eff * o.nb + detail::na_times(h, coupling);

  const double mu = std::cosh(r);
  const cplx nu = std::exp(kI * s.phi) * std::sinh(r);
  const cplx big_a = s.alpha * mu - std::conj(s.alpha) * nu;
  out.c_offset = p.delta_b * (std::pow(std::sinh(r), 2) + std::norm(big_a)) +
                 2.0 * std::real(p.eps * std::exp(kI * p.theta_d) * big_a) +
                 2.0 * std::real(p.omega_p2 * std::exp(kI * p.theta_p) * (big_a * big_a - mu * nu));
  return out;
}

/// omega_a a^dag a + omega_b b^dag b + g1 a^dag a (b^dag + b)
///   + g2 a^dag a (b^dag + b)^2 - g2' a^dag a (b^dag - b)^2
inline Operator build_transformed_stationary(const DerivedParams& d, const HilbertConfig& h) {
  const Operator b = annihilator(h.n_b);
  const Operator bd = b.adjoint();
  const Operator xp = bd + b;
  const Operator xm = bd - b;
  const detail::JointOps o(h);
  return d.omega_a_eff * o.na + d.omega_b_eff * o.nb +
         detail::na_times(h, d.g1 * xp + d.g2 * (xp * xp) - d.g2p * (xm * xm));
}

/// omega_a' a^dag a + omega_b b^dag b + g1 a^dag a (b^dag + b) + g2 a^dag a (b^dag + b)^2
inline Operator build_mixed_approx(const DerivedParams& d, const HilbertConfig& h) {
  const Operator b = annihilator(h.n_b);
  const Operator xp = b.adjoint() + b;
  const detail::JointOps o(h);
  return d.omega_a_eff_prime * o.na + d.omega_b_eff * o.nb +
         detail::na_times(h, d.g1 * xp + d.g2 * (xp * xp));
}

/// Mixed approximation without the first-order coupling.
inline Operator build_quadratic_approx(const DerivedParams& d, const HilbertConfig& h) {
  DerivedParams q = d;
  q.g1 = 0.0;
  return build_mixed_approx(q, h);
}

/// Advisory checks for dropping the g2' terms: g2 >= 10 g2' and
/// omega_b >= 20 n_max g2', with n_max the largest photon number in mode a.
inline std::vector<std::string> rwa_warnings(const DerivedParams& d, int n_max) {
  std::vector<std::string> w;
  if (d.g2 < 10.0 * d.g2p) w.push_back("g2 is not >> g2' (g2 < 10 g2')");
  if (d.omega_b_eff < 20.0 * n_max * d.g2p)
    w.push_back("omega_b_eff is not >> 2 n_max g2' (omega_b < 20 n_max g2')");
  return w;
}

struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::MixedApprox;
  ModelParams params;
  DerivedParams derived;  // unused for ExactRotating
  FlowState flow;         // only for TransformedGeneral
};

struct BuiltHamiltonian {
  Operator hamiltonian;
  double c_offset = 0.0;
  std::vector<std::string> warnings;
};

inline BuiltHamiltonian build(const HamiltonianSpec& spec, const HilbertConfig& h) {
  BuiltHamiltonian out;
  switch (spec.kind) {
    case HamiltonianKind::ExactRotating:
      out.hamiltonian = build_exact_rotating(spec.params, h);
      break;
    case HamiltonianKind::TransformedGeneral: {
      auto t = build_transformed(spec.params, spec.flow, h);
      out.hamiltonian = std::move(t.hamiltonian);
      out.c_offset = t.c_offset;
      break;
    }
    case HamiltonianKind::TransformedStationary:
      out.hamiltonian = build_transformed_stationary(spec.derived, h);
      break;
    case HamiltonianKind::MixedApprox:
      out.hamiltonian = build_mixed_approx(spec.derived, h);
      out.warnings = rwa_warnings(spec.derived, h.n_a - 1);
      break;
    case HamiltonianKind::QuadraticApprox:
      out.hamiltonian = build_quadratic_approx(spec.derived, h);
      out.warnings = rwa_warnings(spec.derived, h.n_a - 1);
      break;
  }
  return out;
}

}  // namespace mixedopt
