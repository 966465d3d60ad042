#pragma once

// Dense linear algebra over truncated one- and two-mode Fock spaces.
//
// Joint-space index convention: mode a is the slow (outer) index, mode b the
// fast (inner) one, i.e. |k_a, k_b> sits at k_a * n_b + k_b.

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <complex>
#include <limits>
#include <string>

#include "mixedopt/error.hpp"

namespace mixedopt {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

enum class Space { ModeA, ModeB, Joint };

inline std::string to_string(Space s) {
  switch (s) {
    case Space::ModeA: return "mode-a";
    case Space::ModeB: return "mode-b";
    case Space::Joint: return "joint";
  }
  return "?";
}

/// Cutoffs of the two-mode space. Levels 0..n-1 are kept for each mode.
struct HilbertConfig {
  static constexpr int kDefaultMaxDim = 4096;

  int n_a = 4;
  int n_b = 60;

  HilbertConfig() = default;
  HilbertConfig(int na, int nb, int max_dim = kDefaultMaxDim) : n_a(na), n_b(nb) {
    if (na < 2 || nb < 2) {
      throw Error(ErrorKind::InvalidCutoff,
                  "cutoffs must be >= 2 (got n_a=" + std::to_string(na) + ", n_b=" +
                      std::to_string(nb) + ")");
    }
    if (static_cast<long>(na) * nb > max_dim) {
      throw Error(ErrorKind::InvalidCutoff, "joint dimension " + std::to_string(na * nb) +
                                                " exceeds ceiling " + std::to_string(max_dim));
    }
  }

  int joint_dim() const { return n_a * n_b; }
  int index(int ka, int kb) const { return ka * n_b + kb; }
};

/// Which space a matrix or vector lives on, with the cutoffs needed to
/// factor joint indices. Single-mode tags carry 1 for the absent mode.
struct SpaceTag {
  Space space = Space::ModeB;
  int n_a = 1;
  int n_b = 1;

  static SpaceTag mode_a(int n) { return {Space::ModeA, n, 1}; }
  static SpaceTag mode_b(int n) { return {Space::ModeB, 1, n}; }
  static SpaceTag joint(int na, int nb) { return {Space::Joint, na, nb}; }
  static SpaceTag joint(const HilbertConfig& h) { return joint(h.n_a, h.n_b); }
  static SpaceTag single(Space s, int n) { return s == Space::ModeA ? mode_a(n) : mode_b(n); }

  int dim() const { return n_a * n_b; }
  friend bool operator==(const SpaceTag&, const SpaceTag&) = default;
};

namespace detail {

inline void require_cutoff(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidCutoff, "cutoff must be >= 2, got " + std::to_string(n));
}

inline void require_same(const SpaceTag& a, const SpaceTag& b, const char* where) {
  if (!(a == b)) {
    throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": " + to_string(a.space) +
                                                  "[" + std::to_string(a.dim()) + "] vs " +
                                                  to_string(b.space) + "[" +
                                                  std::to_string(b.dim()) + "]");
  }
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double hermiticity_error(const Matrix& m) { return max_abs(m - m.adjoint()); }

}  // namespace detail

struct Operator {
  SpaceTag tag;
  Matrix matrix;

  Operator() = default;
  Operator(SpaceTag t, Matrix m) : tag(t), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != tag.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "operator matrix does not match its space tag");
    }
  }

  int dim() const { return static_cast<int>(matrix.rows()); }
  Space space() const { return tag.space; }
  Operator adjoint() const { return {tag, matrix.adjoint()}; }

  Operator& operator+=(const Operator& o) {
    detail::require_same(tag, o.tag, "operator +");
    matrix += o.matrix;
    return *this;
  }
  Operator& operator-=(const Operator& o) {
    detail::require_same(tag, o.tag, "operator -");
    matrix -= o.matrix;
    return *this;
  }
  Operator& operator*=(cplx s) {
    matrix *= s;
    return *this;
  }
};

inline Operator operator+(Operator a, const Operator& b) { return a += b; }
inline Operator operator-(Operator a, const Operator& b) { return a -= b; }
inline Operator operator*(cplx s, Operator a) { return a *= s; }
inline Operator operator*(Operator a, cplx s) { return a *= s; }
inline Operator operator*(double s, Operator a) { return a *= cplx(s); }
inline Operator operator*(const Operator& a, const Operator& b) {
  detail::require_same(a.tag, b.tag, "operator *");
  return {a.tag, a.matrix * b.matrix};
}

/// [A, B]
inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

struct StateVector {
  SpaceTag tag;
  Vector amplitudes;

  StateVector() = default;
  StateVector(SpaceTag t, Vector v) : tag(t), amplitudes(std::move(v)) {
    if (amplitudes.size() != tag.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "state vector does not match its space tag");
    }
  }

  int dim() const { return static_cast<int>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }

  StateVector normalized() const {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::NumericError, "cannot normalize");
    return {tag, amplitudes / n};
  }
};

inline StateVector operator*(const Operator& op, const StateVector& psi) {
  detail::require_same(op.tag, psi.tag, "operator * state");
  return {psi.tag, op.matrix * psi.amplitudes};
}

struct DensityMatrix {
  SpaceTag tag;
  Matrix matrix;

  DensityMatrix() = default;
  DensityMatrix(SpaceTag t, Matrix m) : tag(t), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || matrix.rows() != tag.dim()) {
      throw Error(ErrorKind::DimensionMismatch, "density matrix does not match its space tag");
    }
  }
  /// |psi><psi|
  explicit DensityMatrix(const StateVector& psi)
      : tag(psi.tag), matrix(psi.amplitudes * psi.amplitudes.adjoint()) {}

  int dim() const { return static_cast<int>(matrix.rows()); }
  cplx trace() const { return matrix.trace(); }
};

/// Deviations of a density matrix from the physical set.
struct DensityDiagnostics {
  double trace_deviation = 0.0;
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
};

inline DensityDiagnostics diagnose(const DensityMatrix& rho, bool with_eigenvalues = true) {
  DensityDiagnostics d;
  d.trace_deviation = std::abs(rho.trace() - 1.0);
  d.hermiticity_deviation = detail::hermiticity_error(rho.matrix);
  if (with_eigenvalues) {
    Matrix h = 0.5 * (rho.matrix + rho.matrix.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  return d;
}

/// Throws unless rho is Hermitian, unit-trace and PSD within the given tolerances.
inline void validate(const DensityMatrix& rho, double herm_tol = 1e-10, double trace_tol = 1e-8,
                     double eig_tol = 1e-8) {
  const auto d = diagnose(rho);
  if (d.hermiticity_deviation > herm_tol)
    throw Error(ErrorKind::InvalidInput, "density matrix not Hermitian");
  if (d.trace_deviation > trace_tol)
    throw Error(ErrorKind::InvalidInput, "density matrix trace != 1");
  if (d.min_eigenvalue < -eig_tol)
    throw Error(ErrorKind::NotPositiveSemidefinite, "density matrix has negative eigenvalue");
}

// ---------------------------------------------------------------------------
// Elementary operators

inline Operator identity(SpaceTag tag) { return {tag, Matrix::Identity(tag.dim(), tag.dim())}; }

/// Ladder matrix: <m|a|m+1> = sqrt(m+1).
inline Operator annihilator(int n, Space mode = Space::ModeB) {
  detail::require_cutoff(n);
  if (mode == Space::Joint)
    throw Error(ErrorKind::InvalidSpace, "annihilator is a single-mode operator");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) m(k, k + 1) = std::sqrt(static_cast<double>(k + 1));
  return {SpaceTag::single(mode, n), std::move(m)};
}

inline Operator creator(int n, Space mode = Space::ModeB) { return annihilator(n, mode).adjoint(); }

inline Operator number(int n, Space mode = Space::ModeB) {
  detail::require_cutoff(n);
  if (mode == Space::Joint) throw Error(ErrorKind::InvalidSpace, "number is a single-mode operator");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = static_cast<double>(k);
  return {SpaceTag::single(mode, n), std::move(m)};
}

/// (-1)^{n}
inline Operator parity(int n, Space mode = Space::ModeB) {
  detail::require_cutoff(n);
  if (mode == Space::Joint) throw Error(ErrorKind::InvalidSpace, "parity is a single-mode operator");
  Matrix m = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return {SpaceTag::single(mode, n), std::move(m)};
}

/// Kronecker product A (mode a, outer index) with B (mode b, inner index).
inline Operator tensor(const Operator& a, const Operator& b) {
  if (a.space() != Space::ModeA || b.space() != Space::ModeB) {
    throw Error(ErrorKind::InvalidComposition,
                "tensor expects (mode-a, mode-b), got (" + to_string(a.space()) + ", " +
                    to_string(b.space()) + ")");
  }
  const int na = a.dim();
  const int nb = b.dim();
  Matrix m(na * nb, na * nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) m.block(i * nb, j * nb, nb, nb) = a.matrix(i, j) * b.matrix;
  return {SpaceTag::joint(na, nb), std::move(m)};
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  if (a.tag.space != Space::ModeA || b.tag.space != Space::ModeB)
    throw Error(ErrorKind::InvalidComposition, "tensor expects (mode-a, mode-b) states");
  const int na = a.dim();
  const int nb = b.dim();
  Vector v(na * nb);
  for (int i = 0; i < na; ++i) v.segment(i * nb, nb) = a.amplitudes(i) * b.amplitudes;
  return {SpaceTag::joint(na, nb), std::move(v)};
}

/// O_a (x) I_b
inline Operator embed_a(const Operator& op_a, int n_b) {
  return tensor(op_a, identity(SpaceTag::mode_b(n_b)));
}

/// I_a (x) O_b
inline Operator embed_b(int n_a, const Operator& op_b) {
  return tensor(identity(SpaceTag::mode_a(n_a)), op_b);
}

inline StateVector fock_state(int n, int k, Space mode = Space::ModeB) {
  detail::require_cutoff(n);
  if (k < 0 || k >= n) throw Error(ErrorKind::InvalidInput, "Fock level outside cutoff");
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return {SpaceTag::single(mode, n), std::move(v)};
}

// ---------------------------------------------------------------------------
// Matrix exponential

namespace detail {

inline bool is_anti_hermitian(const Matrix& g) {
  const double scale = std::max(1.0, max_abs(g));
  return max_abs(g + g.adjoint()) <= 1e-14 * scale;
}

/// e^{G} for anti-Hermitian G through the eigenbasis of the Hermitian iG.
inline Matrix expm_anti_hermitian(const Matrix& g) {
  Matrix h = kI * g;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& v = es.eigenvectors();
  Vector phases = (-kI * es.eigenvalues().cast<cplx>()).array().exp();
  return v * phases.asDiagonal() * v.adjoint();
}

/// Scaling and squaring with a Taylor kernel on ||G/2^s||_1 <= 1/2.
inline Matrix expm_general(const Matrix& g) {
  const long n = g.rows();
  const double norm1 = g.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix a = g / std::ldexp(1.0, s);
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * a / static_cast<double>(k)).eval();
    result += term;
    if (max_abs(term) <= 1e-17 * max_abs(result)) break;
  }
  for (int i = 0; i < s; ++i) result = (result * result).eval();
  return result;
}

}  // namespace detail

inline Matrix matrix_exp(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorKind::InvalidInput, "matrix_exp needs a square matrix");
  if (!g.allFinite()) throw Error(ErrorKind::NumericError, "matrix_exp input has non-finite entries");
  Matrix out = detail::is_anti_hermitian(g) ? detail::expm_anti_hermitian(g) : detail::expm_general(g);
  if (!out.allFinite()) throw Error(ErrorKind::NumericError, "matrix_exp produced non-finite entries");
  return out;
}

inline Operator matrix_exp(const Operator& g) { return {g.tag, matrix_exp(g.matrix)}; }

/// D(alpha) = exp(alpha b^dag - alpha^* b), exact on the truncated space.
inline Operator displacement(cplx alpha, int n, Space mode = Space::ModeB) {
  const Operator b = annihilator(n, mode);
  return matrix_exp(alpha * b.adjoint() - std::conj(alpha) * b);
}

/// S(zeta) = exp[(zeta^* b^2 - zeta b^dag^2) / 2], exact on the truncated space.
inline Operator squeeze(cplx zeta, int n, Space mode = Space::ModeB) {
  const Operator b = annihilator(n, mode);
  const Operator bd = b.adjoint();
  return matrix_exp(0.5 * (std::conj(zeta) * (b * b) - zeta * (bd * bd)));
}

/// D(beta)|0>
inline StateVector coherent_state(cplx beta, int n, Space mode = Space::ModeB) {
  return displacement(beta, n, mode) * fock_state(n, 0, mode);
}

// ---------------------------------------------------------------------------
// Reductions

/// Trace out the mode that is not kept.
inline DensityMatrix partial_trace(const DensityMatrix& rho, Space keep) {
  if (rho.tag.space != Space::Joint)
    throw Error(ErrorKind::InvalidSpace, "partial_trace needs a joint-space density matrix");
  if (keep == Space::Joint) throw Error(ErrorKind::InvalidSpace, "keep must be a single mode");
  const int na = rho.tag.n_a;
  const int nb = rho.tag.n_b;
  if (keep == Space::ModeB) {
    Matrix out = Matrix::Zero(nb, nb);
    for (int ka = 0; ka < na; ++ka) out += rho.matrix.block(ka * nb, ka * nb, nb, nb);
    return {SpaceTag::mode_b(nb), std::move(out)};
  }
  Matrix out(na, na);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < na; ++j) out(i, j) = rho.matrix.block(i * nb, j * nb, nb, nb).trace();
  return {SpaceTag::mode_a(na), std::move(out)};
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [-clamp_tol, 0) are treated as zero; anything lower is an error.
inline Matrix sqrt_psd(const Matrix& rho, double clamp_tol = 1e-8) {
  if (detail::hermiticity_error(rho) > 1e-8)
    throw Error(ErrorKind::InvalidInput, "sqrt_psd input not Hermitian");
  Matrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd lam = es.eigenvalues();
  if (lam.minCoeff() < -clamp_tol) {
    throw Error(ErrorKind::NotPositiveSemidefinite,
                "eigenvalue " + std::to_string(lam.minCoeff()) + " below -" + std::to_string(clamp_tol));
  }
  // rounding noise of the eigensolver counts as zero
  const double floor = lam.size() * std::numeric_limits<double>::epsilon() * lam.cwiseAbs().maxCoeff();
  Vector root = lam.unaryExpr([floor](double x) { return x <= floor ? 0.0 : std::sqrt(x); }).cast<cplx>();
  const auto& v = es.eigenvectors();
  return v * root.asDiagonal() * v.adjoint();
}

inline Operator sqrt_psd(const DensityMatrix& rho, double clamp_tol = 1e-8) {
  return {rho.tag, sqrt_psd(rho.matrix, clamp_tol)};
}

// ---------------------------------------------------------------------------
// Cutoff tail checks

/// Number of top Fock levels that count as the truncation tail.
inline int tail_levels(int n) { return std::max(2, n / 10); }

/// Population of mode b in its top tail_levels(n_b) Fock levels.
inline double tail_mass(const DensityMatrix& rho) {
  if (rho.tag.space == Space::ModeA) throw Error(ErrorKind::InvalidSpace, "tail_mass is defined on mode b");
  const int nb = rho.tag.n_b;
  const int na = rho.tag.n_a;
  const int first = nb - tail_levels(nb);
  double mass = 0.0;
  for (int ka = 0; ka < na; ++ka)
    for (int kb = first; kb < nb; ++kb) mass += rho.matrix(ka * nb + kb, ka * nb + kb).real();
  return mass;
}

inline double tail_mass(const StateVector& psi) {
  if (psi.tag.space == Space::ModeA) throw Error(ErrorKind::InvalidSpace, "tail_mass is defined on mode b");
  const int nb = psi.tag.n_b;
  const int na = psi.tag.n_a;
  const int first = nb - tail_levels(nb);
  double mass = 0.0;
  for (int ka = 0; ka < na; ++ka)
    for (int kb = first; kb < nb; ++kb) mass += std::norm(psi.amplitudes(ka * nb + kb));
  return mass;
}

inline void require_tail(double mass, double threshold, const char* what) {
  if (mass > threshold) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": tail mass %.3g exceeds %.3g", mass, threshold);
    throw Error(ErrorKind::CutoffInsufficient, std::string(what) + buf);
  }
}

}  // namespace mixedopt
