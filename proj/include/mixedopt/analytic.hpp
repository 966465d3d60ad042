#pragma once

// Closed-form evolution under the mixed optomechanical Hamiltonian from
// (|0>_a + |1>_a)|0>_b / sqrt(2), and the cat / squeezed-cat components that
// appear after measuring mode a in the |0> +- |1> basis.

#include <cmath>
#include <optional>

#include "mixedopt/fock.hpp"
#include "mixedopt/params.hpp"

namespace mixedopt {

inline constexpr double kTailThreshold = 1e-8;

/// alpha_1(t) = beta1 e^{-eta1} [1 - cos(w t) + i e^{2 eta1} sin(w t)]
inline cplx analytic_alpha1(const AnalyticParams& ap, double t) {
  const double wt = ap.varpi1 * t;
  return ap.beta1 * std::exp(-ap.eta1) * cplx(1.0 - std::cos(wt), std::exp(2.0 * ap.eta1) * std::sin(wt));
}

/// epsilon(t) = eps10 t + beta1^2 sin(w t)
inline double analytic_phase(const AnalyticParams& ap, double t) {
  return ap.eps10 * t + ap.beta1 * ap.beta1 * std::sin(ap.varpi1 * t);
}

/// D[alpha1(t)] S(eta1) S(-eta1 e^{-2 i w t}) |0>_b as a product of exact
/// truncated exponentials.
inline StateVector analytic_b_component(const AnalyticParams& ap, double t, int n_b) {
  const cplx inner = -ap.eta1 * std::exp(-2.0 * kI * ap.varpi1 * t);
  StateVector v = squeeze(inner, n_b) * fock_state(n_b, 0);
  v = squeeze(ap.eta1, n_b) * v;
  v = displacement(analytic_alpha1(ap, t), n_b) * v;
  return v;
}

/// Joint state at time t. Throws cutoff-insufficient when the mode-b
/// component leaks into the top Fock levels.
inline StateVector analytic_state(double t, const AnalyticParams& ap, const HilbertConfig& h,
                                  double tail_threshold = kTailThreshold) {
  const StateVector phi = analytic_b_component(ap, t, h.n_b);
  require_tail(tail_mass(phi), tail_threshold, "analytic_state");
  const StateVector vac = fock_state(h.n_b, 0);
  const StateVector a0 = fock_state(h.n_a, 0, Space::ModeA);
  const StateVector a1 = fock_state(h.n_a, 1, Space::ModeA);
  Vector v = tensor(a0, vac).amplitudes + std::exp(-kI * analytic_phase(ap, t)) * tensor(a1, phi).amplitudes;
  return {SpaceTag::joint(h), v / std::sqrt(2.0)};
}

enum class Sign { Plus, Minus };

inline double sign_value(Sign s) { return s == Sign::Plus ? 1.0 : -1.0; }
inline const char* to_string(Sign s) { return s == Sign::Plus ? "+" : "-"; }

struct CatComponents {
  double time = 0.0;
  cplx alpha1{0.0, 0.0};
  double phase = 0.0;  // relative phase of the displaced branch
  double norm_plus = 0.0;
  double norm_minus = 0.0;
  double p_plus = 0.0;
  double p_minus = 0.0;
  std::optional<StateVector> plus_state;
  std::optional<StateVector> minus_state;

  const StateVector& state(Sign s) const {
    const auto& v = s == Sign::Plus ? plus_state : minus_state;
    if (!v) throw Error(ErrorKind::ZeroProbabilityOutcome, std::string("branch ") + to_string(s) + " has zero weight");
    return *v;
  }
  double probability(Sign s) const { return s == Sign::Plus ? p_plus : p_minus; }
};

namespace detail {

inline constexpr double kZeroProbability = 1e-12;

/// N_pm [ |0> +- e^{-i phase} |chi> ] with the closed-form norm N_pm = (2 +- 2 overlap)^{-1/2}.
inline void fill_components(CatComponents& c, const StateVector& displaced, double overlap_re) {
  const int n = displaced.dim();
  const cplx rel = std::exp(-kI * c.phase);
  const Vector vac = fock_state(n, 0).amplitudes;
  for (Sign s : {Sign::Plus, Sign::Minus}) {
    const double sv = sign_value(s);
    const double w = 2.0 + 2.0 * sv * overlap_re;
    const double p = 0.25 * w;
    std::optional<StateVector> st;
    double norm = std::numeric_limits<double>::infinity();
    if (p >= kZeroProbability) {
      norm = 1.0 / std::sqrt(w);
      st = StateVector(SpaceTag::mode_b(n), norm * (vac + sv * rel * displaced.amplitudes));
    }
    if (s == Sign::Plus) {
      c.norm_plus = norm, c.p_plus = p, c.plus_state = std::move(st);
    } else {
      c.norm_minus = norm, c.p_minus = p, c.minus_state = std::move(st);
    }
  }
}

}  // namespace detail

/// Cat components |0> +- e^{-i eps10 t_c} |alpha1(t_c)> at t_c(k).
inline CatComponents cat_components(const AnalyticParams& ap, int k, int n_b,
                                    double tail_threshold = kTailThreshold) {
  CatComponents c;
  c.time = ap.t_c(k);
  c.alpha1 = analytic_alpha1(ap, c.time);
  c.phase = ap.eps10 * c.time;
  const StateVector coh = coherent_state(c.alpha1, n_b);
  require_tail(tail_mass(coh), tail_threshold, "cat_components");
  const double overlap = std::exp(-0.5 * std::norm(c.alpha1)) * std::cos(c.phase);
  detail::fill_components(c, coh, overlap);
  return c;
}

/// Components |0> +- e^{-i eps(t_s)} D[alpha1(t_s)] S(2 eta1)|0> at t_s(k).
inline CatComponents squeezed_components(const AnalyticParams& ap, int k, int n_b,
                                          double tail_threshold = kTailThreshold) {
  CatComponents c;
  c.time = ap.t_s(k);
  c.alpha1 = analytic_alpha1(ap, c.time);
  c.phase = analytic_phase(ap, c.time);
  const StateVector sq = analytic_b_component(ap, c.time, n_b);
  require_tail(tail_mass(sq), tail_threshold, "squeezed_components");
  const double t2 = std::tanh(2.0 * ap.eta1);
  const cplx z = std::exp(-kI * c.phase - 0.5 * std::conj(c.alpha1) * std::conj(c.alpha1) * t2);
  const double overlap = std::exp(-0.5 * std::norm(c.alpha1)) * z.real() / std::sqrt(std::cosh(2.0 * ap.eta1));
  detail::fill_components(c, sq, overlap);
  return c;
}

template <class State>
struct MeasurementOutcome {
  State state;
  double probability = 0.0;
};

/// Projects mode a onto (|0> +- |1>)/sqrt(2) and returns the normalized
/// mode-b state with its probability.
inline MeasurementOutcome<StateVector> measure_mode_a(const StateVector& psi, Sign sign) {
  if (psi.tag.space != Space::Joint) throw Error(ErrorKind::InvalidSpace, "measure_mode_a needs a joint state");
  const int nb = psi.tag.n_b;
  const Vector b = (psi.amplitudes.segment(0, nb) + sign_value(sign) * psi.amplitudes.segment(nb, nb)) / std::sqrt(2.0);
  const double p = b.squaredNorm();
  if (p < detail::kZeroProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "measurement outcome has zero probability");
  return {StateVector(SpaceTag::mode_b(nb), b / std::sqrt(p)), p};
}

inline MeasurementOutcome<DensityMatrix> measure_mode_a(const DensityMatrix& rho, Sign sign) {
  if (rho.tag.space != Space::Joint) throw Error(ErrorKind::InvalidSpace, "measure_mode_a needs a joint state");
  const int nb = rho.tag.n_b;
  const double s = sign_value(sign);
  const auto blk = [&](int i, int j) { return rho.matrix.block(i * nb, j * nb, nb, nb); };
  Matrix m = 0.5 * (blk(0, 0) + s * blk(0, 1) + s * blk(1, 0) + blk(1, 1));
  const double p = m.trace().real();
  if (p < detail::kZeroProbability) throw Error(ErrorKind::ZeroProbabilityOutcome, "measurement outcome has zero probability");
  return {DensityMatrix(SpaceTag::mode_b(nb), m / p), p};
}

}  // namespace mixedopt
