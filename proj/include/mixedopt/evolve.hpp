#pragma once

// Closed (Schroedinger) and open (Lindblad) time propagation with thermal
// and squeezed-thermal dissipators.

#include <Eigen/Sparse>

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixedopt/fock.hpp"
#include "mixedopt/ode.hpp"
#include "mixedopt/params.hpp"

namespace mixedopt {

/// One bath channel attached to mode a or b: rate kappa, occupation N and
/// two-photon correlation M (zero for a plain thermal bath).
struct DissipatorChannel {
  Space mode = Space::ModeB;
  double rate = 0.0;
  double occupation = 0.0;
  cplx correlation{0.0, 0.0};

  /// Complete positivity of the squeezed-thermal channel, |M|^2 <= N(N+1),
  /// checked relative to N(N+1) since both sides grow like e^{4r}.
  void validate() const {
    if (mode == Space::Joint) throw Error(ErrorKind::InvalidInput, "channel must act on one mode");
    if (rate < 0.0 || occupation < 0.0)
      throw Error(ErrorKind::UnphysicalBath, "negative rate or occupation");
    const double bound = occupation * (occupation + 1.0);
    if (std::norm(correlation) > bound + 1e-12 * std::max(1.0, bound))
      throw Error(ErrorKind::UnphysicalBath, "|M|^2 = " + std::to_string(std::norm(correlation)) +
                                                 " exceeds N(N+1) = " + std::to_string(bound));
  }
};

enum class Frame { Original, Transformed };

/// Mode-a thermal channel plus mode-b squeezed channel, with the mode-b bath
/// seen either directly or in the squeezed/displaced frame.
inline std::vector<DissipatorChannel> make_channels(const ModelParams& p, Frame frame,
                                                    const DerivedParams* derived = nullptr) {
  std::vector<DissipatorChannel> ch;
  ch.push_back({Space::ModeA, p.kappa_a, p.n_th, 0.0});
  if (frame == Frame::Original) {
    const auto bath = bath_params_original(p.r_e, p.theta_e);
    ch.push_back({Space::ModeB, p.kappa_b, bath.n, bath.m});
  } else {
    if (derived == nullptr)
      throw Error(ErrorKind::InvalidInput, "transformed-frame channels need derived parameters");
    ch.push_back({Space::ModeB, p.kappa_b, derived->n_ss, derived->m_ss});
  }
  for (const auto& c : ch) c.validate();
  return ch;
}

namespace detail {

using Sparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline Sparse to_sparse(const Matrix& m) { return m.sparseView(0.0, 0.0); }

}  // namespace detail

/// Lindblad generator
///   L rho = -i[H, rho] + sum_channels kappa (N+1) D[o] + kappa N D[o^dag]
///           - kappa M G[o] - kappa M^* G[o^dag]
/// with D[o]rho = o rho o^dag - {o^dag o, rho}/2 and
///      G[o]rho = o rho o - (o o rho + rho o o)/2.
/// Written as K rho + rho K^dag + jumps, with sparse operators.
class Liouvillian {
 public:
  Liouvillian(const Operator& hamiltonian, const std::vector<DissipatorChannel>& channels)
      : tag_(hamiltonian.tag) {
    if (detail::hermiticity_error(hamiltonian.matrix) > 1e-10 * std::max(1.0, detail::max_abs(hamiltonian.matrix)))
      throw Error(ErrorKind::InvalidInput, "Hamiltonian is not Hermitian");
    Matrix k = -kI * hamiltonian.matrix;
    for (const auto& c : channels) {
      c.validate();
      if (c.rate == 0.0) continue;
      const Matrix o = mode_annihilator(c.mode);
      const Matrix od = o.adjoint();
      const double down = c.rate * (c.occupation + 1.0);
      const double up = c.rate * c.occupation;
      if (down != 0.0) {
        k -= 0.5 * down * (od * o);
        jumps_.push_back({down, detail::to_sparse(o)});
      }
      if (up != 0.0) {
        k -= 0.5 * up * (o * od);
        jumps_.push_back({up, detail::to_sparse(od)});
      }
      if (c.correlation != cplx(0.0)) {
        const cplx km = c.rate * c.correlation;
        k += 0.5 * km * (o * o) + 0.5 * std::conj(km) * (od * od);
        pairs_.push_back({km, detail::to_sparse(o), detail::to_sparse(od)});
      }
    }
    k_ = detail::to_sparse(k);
  }

  const SpaceTag& tag() const { return tag_; }

  Matrix apply(const Matrix& rho) const {
    Matrix out = k_ * rho;
    out += (k_ * rho.adjoint()).adjoint();
    for (const auto& j : jumps_) {
      const Matrix y = j.op * rho;
      out += j.rate * (j.op * y.adjoint()).adjoint();
    }
    for (const auto& p : pairs_) {
      const Matrix y = p.o * rho;            // o rho
      const Matrix z = p.od * rho;           // o^dag rho
      out -= p.km * (p.od * y.adjoint()).adjoint();              // o rho o
      out -= std::conj(p.km) * (p.o * z.adjoint()).adjoint();    // o^dag rho o^dag
    }
    return out;
  }

 private:
  struct Jump {
    double rate;
    detail::Sparse op;
  };
  struct Pair {
    cplx km;
    detail::Sparse o;
    detail::Sparse od;
  };

  Matrix mode_annihilator(Space mode) const {
    if (tag_.space != Space::Joint) {
      if (mode != tag_.space) throw Error(ErrorKind::DimensionMismatch, "channel mode not in this space");
      return annihilator(tag_.dim(), mode).matrix;
    }
    if (mode == Space::ModeA) return embed_a(annihilator(tag_.n_a, Space::ModeA), tag_.n_b).matrix;
    return embed_b(tag_.n_a, annihilator(tag_.n_b)).matrix;
  }

  SpaceTag tag_;
  detail::Sparse k_;
  std::vector<Jump> jumps_;
  std::vector<Pair> pairs_;
};

inline DensityMatrix lindblad_rhs(const DensityMatrix& rho, const Operator& hamiltonian,
                                  const std::vector<DissipatorChannel>& channels) {
  detail::require_same(rho.tag, hamiltonian.tag, "lindblad_rhs");
  return {rho.tag, Liouvillian(hamiltonian, channels).apply(rho.matrix)};
}

// ---------------------------------------------------------------------------

struct SampleDiagnostics {
  double trace_deviation = 0.0;
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;  // NaN when not sampled
  double norm_deviation = 0.0;  // state vectors only
};

struct HygieneLimits {
  double trace = 1e-8;
  double hermiticity = 1e-8;
  double min_eigenvalue = -1e-6;
  double norm = 1e-10;
};

template <class State>
struct PropagationResult {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<SampleDiagnostics> diagnostics;
  ode::Stats stats;
  bool degraded = false;
};

struct MasterOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  int eigen_stride = 1;  // compute min eigenvalue every n-th sample, 0 = never
  HygieneLimits limits;
};

inline SampleDiagnostics diagnose_sample(const DensityMatrix& rho, bool eig) {
  const auto d = diagnose(rho, eig);
  SampleDiagnostics s;
  s.trace_deviation = d.trace_deviation;
  s.hermiticity_deviation = d.hermiticity_deviation;
  s.min_eigenvalue = eig ? d.min_eigenvalue : std::numeric_limits<double>::quiet_NaN();
  return s;
}

inline bool within(const SampleDiagnostics& s, const HygieneLimits& l) {
  return s.trace_deviation < l.trace && s.hermiticity_deviation < l.hermiticity &&
         !(s.min_eigenvalue < l.min_eigenvalue) && s.norm_deviation < l.norm;
}

/// Streams rho(t) for every t in t_grid into observe(i, t, rho, diagnostics).
/// The integrated state is never renormalized; drift shows up in the diagnostics.
inline ode::Stats propagate_master_stream(
    const DensityMatrix& rho0, const Operator& hamiltonian, const std::vector<DissipatorChannel>& channels,
    std::span<const double> t_grid,
    const std::function<void(std::size_t, double, const DensityMatrix&, const SampleDiagnostics&)>& observe,
    const MasterOptions& opt = {}) {
  detail::require_same(rho0.tag, hamiltonian.tag, "propagate_master");
  if (t_grid.empty()) return {};
  const Liouvillian liouv(hamiltonian, channels);
  ode::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  o.failure_kind = ErrorKind::IntegrationError;
  const SpaceTag tag = rho0.tag;
  return ode::integrate(
      [&](double, const Matrix& m) -> Matrix { return liouv.apply(m); }, rho0.matrix, t_grid.front(),
      t_grid,
      [&](std::size_t i, double t, const Matrix& m) {
        DensityMatrix rho(tag, m);
        const bool eig = opt.eigen_stride > 0 && i % static_cast<std::size_t>(opt.eigen_stride) == 0;
        observe(i, t, rho, diagnose_sample(rho, eig));
      },
      o);
}

inline PropagationResult<DensityMatrix> propagate_master(const DensityMatrix& rho0, const Operator& hamiltonian,
                                                         const std::vector<DissipatorChannel>& channels,
                                                         std::span<const double> t_grid,
                                                         const MasterOptions& opt = {}) {
  PropagationResult<DensityMatrix> out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.states.resize(t_grid.size());
  out.diagnostics.resize(t_grid.size());
  out.stats = propagate_master_stream(
      rho0, hamiltonian, channels, t_grid,
      [&](std::size_t i, double, const DensityMatrix& rho, const SampleDiagnostics& d) {
        out.states[i] = rho;
        out.diagnostics[i] = d;
        if (!within(d, opt.limits)) out.degraded = true;
      },
      opt);
  return out;
}

// ---------------------------------------------------------------------------
// Closed systems

/// e^{-iHt} from a Hermitian eigendecomposition. Hamiltonians that conserve
/// a^dag a (block diagonal in the mode-a number) are decomposed block by block.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const Operator& hamiltonian) : tag_(hamiltonian.tag) {
    const Matrix& h = hamiltonian.matrix;
    if (detail::hermiticity_error(h) > 1e-10 * std::max(1.0, detail::max_abs(h)))
      throw Error(ErrorKind::InvalidInput, "Hamiltonian is not Hermitian");
    int nblocks = 1;
    int bs = tag_.dim();
    if (tag_.space == Space::Joint && conserves_na(h)) {
      nblocks = tag_.n_a;
      bs = tag_.n_b;
    }
    for (int k = 0; k < nblocks; ++k) {
      Matrix blk = h.block(k * bs, k * bs, bs, bs);
      blk = (0.5 * (blk + blk.adjoint())).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
      if (es.info() != Eigen::Success) throw Error(ErrorKind::NumericError, "eigensolver failed");
      blocks_.push_back({k * bs, bs, es.eigenvectors(), es.eigenvalues()});
    }
  }

  StateVector evolve(const StateVector& psi0, double t) const {
    detail::require_same(psi0.tag, tag_, "SpectralPropagator::evolve");
    Vector out(psi0.dim());
    for (const auto& b : blocks_) {
      const Vector c = b.vectors.adjoint() * psi0.amplitudes.segment(b.offset, b.size);
      const Vector phased = c.cwiseProduct((-kI * t * b.values.cast<cplx>()).array().exp().matrix());
      out.segment(b.offset, b.size) = b.vectors * phased;
    }
    return {tag_, std::move(out)};
  }

  /// Eigenvalues of each block, ascending.
  std::vector<Eigen::VectorXd> block_eigenvalues() const {
    std::vector<Eigen::VectorXd> v;
    for (const auto& b : blocks_) v.push_back(b.values);
    return v;
  }

  bool block_diagonal() const { return blocks_.size() > 1; }

 private:
  bool conserves_na(const Matrix& h) const {
    const int na = tag_.n_a;
    const int nb = tag_.n_b;
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j)
        if (i != j && detail::max_abs(h.block(i * nb, j * nb, nb, nb)) != 0.0) return false;
    return true;
  }

  struct Block {
    int offset;
    int size;
    Matrix vectors;
    Eigen::VectorXd values;
  };
  SpaceTag tag_;
  std::vector<Block> blocks_;
};

enum class SchrodingerMethod { Spectral, Ode };

struct SchrodingerOptions {
  SchrodingerMethod method = SchrodingerMethod::Spectral;
  double rtol = 1e-8;
  double atol = 1e-10;
  HygieneLimits limits;
};

inline PropagationResult<StateVector> propagate_schrodinger(const StateVector& psi0, const Operator& hamiltonian,
                                                            std::span<const double> t_grid,
                                                            const SchrodingerOptions& opt = {}) {
  detail::require_same(psi0.tag, hamiltonian.tag, "propagate_schrodinger");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw Error(ErrorKind::InvalidInput, "initial state not normalized");
  PropagationResult<StateVector> out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.states.resize(t_grid.size());
  out.diagnostics.resize(t_grid.size());
  auto record = [&](std::size_t i, const StateVector& psi) {
    SampleDiagnostics d;
    d.norm_deviation = std::abs(psi.norm() - 1.0);
    d.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    if (!within(d, opt.limits)) out.degraded = true;
    out.states[i] = psi;
    out.diagnostics[i] = d;
  };
  if (opt.method == SchrodingerMethod::Spectral) {
    const SpectralPropagator prop(hamiltonian);
    for (std::size_t i = 0; i < t_grid.size(); ++i) record(i, prop.evolve(psi0, t_grid[i] - t_grid.front()));
    return out;
  }
  if (t_grid.empty()) return out;
  const detail::Sparse h = detail::to_sparse(hamiltonian.matrix);
  ode::Options o;
  o.rtol = opt.rtol;
  o.atol = opt.atol;
  const SpaceTag tag = psi0.tag;
  out.stats = ode::integrate([&](double, const Vector& v) -> Vector { return -kI * (h * v); }, psi0.amplitudes,
                             t_grid.front(), t_grid,
                             [&](std::size_t i, double, const Vector& v) { record(i, StateVector(tag, v)); }, o);
  return out;
}

}  // namespace mixedopt
