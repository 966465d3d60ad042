#pragma once

// Wigner function, fidelities and expectation values.

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "mixedopt/fock.hpp"
#include "mixedopt/parallel.hpp"

namespace mixedopt {

struct WignerGridSpec {
  double re_min = -5.0;
  double re_max = 5.0;
  double im_min = -5.0;
  double im_max = 5.0;
  int n_re = 201;
  int n_im = 201;

  std::vector<double> re_axis() const { return axis(re_min, re_max, n_re); }
  std::vector<double> im_axis() const { return axis(im_min, im_max, n_im); }

  static std::vector<double> axis(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
  }
};

struct WignerGrid {
  std::vector<double> re_axis;
  std::vector<double> im_axis;
  Eigen::MatrixXd values;  // values(i_im, i_re)
  double normalization = 0.0;
  double max_imag_residue = 0.0;

  double min() const { return values.minCoeff(); }
  double max() const { return values.maxCoeff(); }
};

/// W(zeta) = (2/pi) Tr[D^dag(zeta) rho D(zeta) P] at a single point, straight
/// from the definition. The state is padded with empty levels so that the
/// truncated exponential D(zeta) is accurate on the support of rho.
inline cplx wigner_point(const DensityMatrix& rho_b, cplx zeta) {
  if (rho_b.tag.space != Space::ModeB) throw Error(ErrorKind::InvalidSpace, "wigner expects a mode-b state");
  const int n = rho_b.dim();
  const double s = std::abs(zeta);
  const int big = n + static_cast<int>(std::ceil(4.0 * s * s + 20.0 * s + 40.0));
  Matrix rho = Matrix::Zero(big, big);
  rho.topLeftCorner(n, n) = rho_b.matrix;
  const Matrix d = displacement(zeta, big).matrix;
  const Matrix p = parity(big).matrix;
  return 2.0 / kPi * (d.adjoint() * rho * d * p).trace();
}

namespace detail {

/// f[d][k] = <k+d| D(beta) |k> e^{-i d arg beta} for |beta|^2 = x, k + d < n,
/// i.e. sqrt(k!/(k+d)!) e^{-x/2} x^{d/2} L_k^{(d)}(x), by the normalized
/// three-term Laguerre recurrence.
inline std::vector<std::vector<double>> displacement_elements(double x, int n) {
  std::vector<std::vector<double>> f(n);
  for (int d = 0; d < n; ++d) {
    const int len = n - d;
    auto& v = f[d];
    v.resize(len);
    const double log0 = -0.5 * x - 0.5 * std::lgamma(d + 1.0) + (d == 0 ? 0.0 : 0.5 * d * std::log(x));
    v[0] = (x == 0.0 && d > 0) ? 0.0 : std::exp(log0);
    double prev = 0.0;
    for (int k = 0; k + 1 < len; ++k) {
      const double next = ((2.0 * k + 1.0 + d - x) * v[k] - std::sqrt(k * (k + static_cast<double>(d))) * prev) /
                          std::sqrt((k + 1.0) * (k + 1.0 + d));
      prev = v[k];
      v[k + 1] = next;
    }
  }
  return f;
}

}  // namespace detail

/// Wigner function on a rectangular grid by displaced parity.
///
/// D(zeta) P D(zeta)^dag = D(2 zeta) P, so W = (2/pi) sum_{n,m} rho_{nm}
/// (-1)^n <m|D(2 zeta)|n> with the exact (untruncated) displacement matrix
/// elements on the support of rho. The elements depend on |zeta| only, so the
/// grid is processed one distinct radius at a time.
inline WignerGrid wigner(const DensityMatrix& rho_b, const WignerGridSpec& spec = {},
                         double tail_threshold = 1e-8) {
  if (rho_b.tag.space != Space::ModeB) throw Error(ErrorKind::InvalidSpace, "wigner expects a mode-b state");
  require_tail(tail_mass(rho_b), tail_threshold, "wigner");
  const int n = rho_b.dim();
  const Matrix& rho = rho_b.matrix;

  WignerGrid out;
  out.re_axis = spec.re_axis();
  out.im_axis = spec.im_axis();
  out.values = Eigen::MatrixXd::Zero(spec.n_im, spec.n_re);

  // group grid points by radius; the key is exact on mirror-symmetric axes
  std::map<std::pair<double, double>, std::vector<std::pair<int, int>>> groups;
  for (int i = 0; i < spec.n_im; ++i) {
    for (int j = 0; j < spec.n_re; ++j) {
      const double x = std::abs(out.re_axis[j]);
      const double y = std::abs(out.im_axis[i]);
      groups[{std::min(x, y), std::max(x, y)}].emplace_back(i, j);
    }
  }
  std::vector<const std::pair<const std::pair<double, double>, std::vector<std::pair<int, int>>>*> work;
  work.reserve(groups.size());
  for (const auto& g : groups) work.push_back(&g);

  Eigen::MatrixXd imag = Eigen::MatrixXd::Zero(spec.n_im, spec.n_re);
  parallel_for(work.size(), [&](std::size_t w) {
    const auto& [key, points] = *work[w];
    const double s = 2.0 * std::hypot(key.first, key.second);
    const auto f = detail::displacement_elements(s * s, n);
    // upper[d] pairs with e^{i d theta}, lower[d] with e^{-i d theta}
    std::vector<cplx> upper(n, 0.0), lower(n, 0.0);
    for (int d = 0; d < n; ++d) {
      for (int k = 0; k + d < n; ++k) {
        const double fk = (k % 2 == 0 ? 1.0 : -1.0) * f[d][k];
        upper[d] += rho(k, k + d) * fk;
        if (d > 0) lower[d] += rho(k + d, k) * fk;
      }
    }
    for (const auto& [i, j] : points) {
      const double theta = std::atan2(out.im_axis[i], out.re_axis[j]);
      const cplx step = std::exp(kI * theta);
      cplx ph = 1.0;
      cplx acc = upper[0];
      for (int d = 1; d < n; ++d) {
        ph *= step;
        acc += ph * upper[d] + std::conj(ph) * lower[d];
      }
      const cplx wv = 2.0 / kPi * acc;
      out.values(i, j) = wv.real();
      imag(i, j) = wv.imag();
    }
  });

  out.max_imag_residue = imag.cwiseAbs().maxCoeff();
  const double dx = spec.n_re > 1 ? (spec.re_max - spec.re_min) / (spec.n_re - 1) : 0.0;
  const double dy = spec.n_im > 1 ? (spec.im_max - spec.im_min) / (spec.n_im - 1) : 0.0;
  out.normalization = out.values.sum() * dx * dy;
  return out;
}

inline WignerGrid wigner(const StateVector& psi_b, const WignerGridSpec& spec = {}, double tail_threshold = 1e-8) {
  return wigner(DensityMatrix(psi_b), spec, tail_threshold);
}

/// |<psi1|psi2>|
inline double fidelity_pure(const StateVector& a, const StateVector& b) {
  detail::require_same(a.tag, b.tag, "fidelity_pure");
  return std::abs(a.amplitudes.dot(b.amplitudes));
}

/// Uhlmann fidelity Tr[(sqrt(rho1) rho2 sqrt(rho1))^{1/2}].
inline double fidelity_mixed(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  detail::require_same(rho1.tag, rho2.tag, "fidelity_mixed");
  const Matrix s = sqrt_psd(rho1.matrix);
  Matrix x = s * rho2.matrix * s;
  x = (0.5 * (x + x.adjoint())).eval();
  return sqrt_psd(x).trace().real();
}

inline cplx expectation(const DensityMatrix& rho, const Operator& op) {
  detail::require_same(rho.tag, op.tag, "expectation");
  return (rho.matrix * op.matrix).trace();
}

inline cplx expectation(const StateVector& psi, const Operator& op) {
  detail::require_same(psi.tag, op.tag, "expectation");
  return psi.amplitudes.dot(op.matrix * psi.amplitudes);
}

/// Tr rho^2
inline double purity(const DensityMatrix& rho) {
  return rho.matrix.cwiseProduct(rho.matrix.transpose()).sum().real();
}

}  // namespace mixedopt
