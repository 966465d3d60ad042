#pragma once

// Dormand-Prince 5(4) with step-size control and the 4th-order continuous
// extension for output at arbitrary times. Works on any Eigen dense type
// (real or complex vectors and matrices).

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "mixedopt/error.hpp"

namespace mixedopt::ode {

struct Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 picks a starting step from the RHS scale
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
  ErrorKind failure_kind = ErrorKind::IntegrationError;
};

struct Stats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

namespace tableau {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// 5th minus 4th order weights
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// dense output
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace tableau

namespace detail {

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, const Options& o) {
  auto scale = o.atol + o.rtol * y0.array().abs().max(y1.array().abs());
  return (err.array().abs() / scale).maxCoeff();
}

template <class State>
double scaled_norm(const State& y, const Options& o) {
  return (y.array().abs() / (o.atol + o.rtol * y.array().abs())).maxCoeff();
}

}  // namespace detail

/// Integrates y' = f(t, y) from (t0, y0) and calls observe(i, t_out[i], y)
/// for every requested output time. t_out must be non-decreasing and >= t0.
/// f has signature State f(double t, const State& y).
template <class State, class Rhs, class Observer>
Stats integrate(Rhs&& f, State y, double t0, std::span<const double> t_out, Observer&& observe,
                const Options& opt = {}) {
  using namespace tableau;
  Stats stats;
  std::size_t next = 0;
  while (next < t_out.size() && t_out[next] <= t0) {
    if (t_out[next] < t0) throw Error(ErrorKind::InvalidInput, "output time precedes t0");
    observe(next, t_out[next], y);
    ++next;
  }
  if (next == t_out.size()) return stats;
  const double t_end = t_out.back();

  double t = t0;
  State k1 = f(t, y);
  ++stats.rhs_evals;

  double h = opt.h_init;
  if (h <= 0.0) {
    const double d0 = detail::scaled_norm(y, opt);
    const double d1n = detail::scaled_norm(k1, opt);
    h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h = std::min(h, t_end - t0);
  }
  h = std::min(h, opt.h_max);

  State k2, k3, k4, k5, k6, k7, y1;
  while (next < t_out.size()) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw IntegrationFailure(opt.failure_kind, "step budget exhausted", t);
    const double h_floor = 1e-13 * std::max(1.0, std::abs(t));
    if (h < h_floor) throw IntegrationFailure(opt.failure_kind, "step size underflow", t);
    if (t + h > t_end) h = t_end - t;

    k2 = f(t + c2 * h, y + h * (a21 * k1));
    k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    k7 = f(t + h, y1);
    stats.rhs_evals += 6;

    const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = detail::scaled_error(err, y, y1, opt);
    if (!std::isfinite(en)) {
      ++stats.rejected;
      h *= 0.1;
      continue;
    }
    if (en > 1.0) {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      continue;
    }

    const double t1 = t + h;
    ++stats.accepted;
    stats.min_step = std::min(stats.min_step, h);
    stats.max_step = std::max(stats.max_step, h);

    if (next < t_out.size() && t_out[next] <= t1) {
      const State ydiff = y1 - y;
      const State bspl = h * k1 - ydiff;
      const State r4 = ydiff - h * k7 - bspl;
      const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next < t_out.size() && t_out[next] <= t1) {
        const double th = (t_out[next] - t) / h;
        const double th1 = 1.0 - th;
        if (t_out[next] == t1) {
          observe(next, t_out[next], y1);
        } else {
          const State yi = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
          observe(next, t_out[next], yi);
        }
        ++next;
      }
    }

    y = y1;
    k1 = k7;
    t = t1;
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h = std::min(h * fac, opt.h_max);
  }
  return stats;
}

}  // namespace mixedopt::ode
