#include <gtest/gtest.h>

#include <random>

#include "mixedopt/params.hpp"

using namespace mixedopt;

namespace {

// Frozen values from a 30-digit evaluation of the closed forms.
constexpr double kR049 = 1.14877996253;          // r at Omega_p = 0.49
constexpr double kAlphaEps03 = 4.75534970779;    // alpha_ss, eps = 0.3, kappa_b = 0
constexpr double kAlphaKappa = 0.0141777136045;  // alpha_ss, eps = 0.001, kappa_b = 0.02
constexpr double kOmegaB049 = 0.19899748742;     // sqrt(1 - 4 * 0.49^2)
constexpr double kEta1 = 0.101366277027;         // ln(1.5) / 4
constexpr double kTc = 12.8901107927;            // t_c(0) * Delta_b
constexpr double kNss112 = 21.5615015222;        // (cosh 4.48 - 1) / 2

ModelParams fig5(double eps = 0.3) {
  ModelParams p;
  p.chi = 0.01;
  p.omega_p2 = 0.49;
  p.eps = eps;
  return p;
}

}  // namespace

TEST(StationaryR, Values) {
  ModelParams p;
  EXPECT_EQ(stationary_r(p), 0.0);
  p.omega_p2 = 0.49;
  EXPECT_NEAR(stationary_r(p), kR049, 1e-10);
  p.omega_p2 = 0.5 * std::tanh(2.24);
  EXPECT_NEAR(stationary_r(p), 1.12, 1e-12);
}

TEST(StationaryR, Domain) {
  ModelParams p;
  p.omega_p2 = 0.5;
  try {
    stationary_r(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutsideStationaryDomain);
  }
  p.omega_p2 = 0.3;
  p.theta_p = 0.0;
  EXPECT_THROW(stationary_r(p), Error);
}

TEST(SteadyAlpha, Values) {
  ModelParams p = fig5(0.0);
  EXPECT_EQ(steady_alpha(p, stationary_r(p)).alpha_ss, 0.0);
  p.eps = 0.3;
  EXPECT_NEAR(steady_alpha(p, stationary_r(p)).alpha_ss, kAlphaEps03, 1e-9);
  p.eps = 0.001;
  p.kappa_b = 0.02;
  const auto sd = steady_alpha(p, stationary_r(p));
  EXPECT_NEAR(sd.alpha_ss, kAlphaKappa, 1e-12);
  EXPECT_NEAR(std::tan(sd.theta_d_required), 0.02 / (2 * 0.02), 1e-14);
}

TEST(SteadyAlpha, SingularOnlyWithoutDamping) {
  ModelParams p;
  p.omega_p2 = 0.5;
  p.eps = 0.1;
  try {
    steady_alpha(p, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularDisplacement);
  }
  p.kappa_b = 0.1;
  EXPECT_NEAR(steady_alpha(p, 0.0).alpha_ss, 0.1 / 0.05, 1e-14);
}

TEST(EffectiveParams, CaptionValues) {
  const DerivedParams d = effective_params(fig5());
  EXPECT_NEAR(d.g2 / d.omega_b_eff, 0.125, 1e-12);
  EXPECT_NEAR(d.g1 / d.omega_b_eff, 2.378, 5e-3);
  EXPECT_NEAR(d.omega_b_eff, kOmegaB049, 1e-10);
  EXPECT_EQ(d.phi, kPi);
}

TEST(EffectiveParams, DriveRealPartKeepsCouplingFixed) {
  const DerivedParams d0 = effective_params(with_drive_real_part(fig5(), 0.38));
  EXPECT_NEAR(d0.g1 / d0.omega_b_eff, 3.012, 5e-3);
  for (double kb : {0.02, 0.1, 0.5}) {
    ModelParams p = fig5();
    p.kappa_b = kb;
    const DerivedParams d = effective_params(with_drive_real_part(p, 0.38));
    EXPECT_NEAR(d.g1, d0.g1, 1e-12 * d0.g1) << kb;
  }
}

TEST(EffectiveParams, CouplingIdentities) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ModelParams p;
    p.chi = 0.1 * u(rng);
    p.omega_p2 = 0.4999 * u(rng);
    p.eps = u(rng);
    p.kappa_b = 0.5 * u(rng);
    const DerivedParams d = effective_params(p);
    EXPECT_NEAR(d.g2 * d.g2p, p.chi * p.chi / 16, 1e-15);
    EXPECT_NEAR(d.g1, 4.0 * d.g2 * d.alpha_ss, 1e-12 * std::max(1.0, d.g1));
    EXPECT_NEAR(d.omega_a_eff_prime - d.omega_a_eff, d.g2p, 1e-14);
    EXPECT_GT(d.omega_b_eff, 0.0);
  }
}

TEST(EffectiveFrequency, ThreeFormsAgree) {
  for (double om : {0.0, 0.1, 0.3, 0.45, 0.49, 0.499}) {
    ModelParams p;
    p.omega_p2 = om;
    const double r = stationary_r(p);
    const double e = omega_b_eff_exponential(1.0, om, r);
    EXPECT_NEAR(e, omega_b_eff_hyperbolic(1.0, om, r), 1e-12) << om;
    EXPECT_NEAR(e, omega_b_eff_tanh(1.0, om, r), 1e-12) << om;
    EXPECT_NEAR(e, std::sqrt(1.0 - 4.0 * om * om), 1e-12) << om;
  }
}

TEST(BathParams, Suppression) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const double r = u(rng);
    const auto b = bath_params_stationary(r, 0.0, r);
    EXPECT_LT(std::abs(b.n), 1e-14);
    EXPECT_LT(std::abs(b.m), 1e-14);
  }
  const auto v = bath_params(0.0, 0.3, 0.0, 1.1);
  EXPECT_EQ(v.n, 0.0);
  EXPECT_LT(std::abs(v.m), 1e-15);
}

TEST(BathParams, LargeOccupationExample) {
  const auto b = bath_params_stationary(1.12, kPi, 1.12);
  EXPECT_NEAR(b.n, kNss112, 1e-9);
  EXPECT_NEAR(b.n, 0.5 * (std::cosh(4.48) - 1.0), 1e-10);
}

TEST(BathParams, GeneralFormMatchesStationaryForm) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ur(0.0, 2.0);
  std::uniform_real_distribution<double> ut(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    const double re = ur(rng), th = ut(rng), r = ur(rng);
    const auto g = bath_params(re, th, r, kPi);
    const auto s = bath_params_stationary(re, th, r);
    const double scale = std::max(1.0, std::abs(s.n) + std::abs(s.m));
    worst = std::max(worst, (std::abs(g.n - s.n) + std::abs(g.m - s.m)) / scale);
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(BathParams, Physicality) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ur(0.0, 2.0);
  std::uniform_real_distribution<double> ut(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const auto b = bath_params(ur(rng), ut(rng), ur(rng), ut(rng));
    EXPECT_GE(b.n, -1e-15);
    EXPECT_LE(std::norm(b.m), b.n * (b.n + 1.0) + 1e-12 * std::max(1.0, b.n * (b.n + 1.0)));
  }
}

TEST(BathParams, OriginalFrame) {
  const auto b = bath_params_original(1.12, 0.0);
  EXPECT_NEAR(b.n, 1.87494744796, 1e-10);
  EXPECT_NEAR(b.m.real(), 2.32171819577, 1e-10);
  EXPECT_EQ(b.m.imag(), 0.0);
}

TEST(Flow, StationaryZeros) {
  ModelParams p = fig5();
  const FlowState fp = flow_fixed_point(p);
  const FlowDerivative d = flow_rhs(fp, p);
  EXPECT_EQ(d.dr, std::sin(2 * kPi) * 2 * p.omega_p2);
  EXPECT_LT(std::abs(d.dr), 1e-15);
  EXPECT_LT(std::abs(d.dphi), 1e-12);
  EXPECT_LT(std::abs(d.dalpha), 1e-12);
  EXPECT_NEAR(std::abs(fp.alpha), kAlphaEps03, 1e-9);
}

TEST(Flow, FixedPointModulusWithDamping) {
  ModelParams p = fig5(0.001);
  p.kappa_b = 0.02;
  p.theta_d = steady_alpha(p, stationary_r(p)).theta_d_required;
  const FlowState fp = flow_fixed_point(p);
  EXPECT_NEAR(std::abs(fp.alpha), kAlphaKappa, 1e-12);
  EXPECT_LT(std::abs(fp.alpha.imag()), 1e-15);
  EXPECT_LT(std::abs(flow_rhs(fp, p).dalpha), 1e-15);
}

TEST(Flow, CothSingularity) {
  ModelParams p = fig5();
  try {
    flow_rhs(FlowState{0.0, kPi, 0.0}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CothSingularity);
  }
}

TEST(Flow, ConstantAtFixedPoint) {
  ModelParams p = fig5(0.001);
  p.kappa_b = 0.02;
  p.theta_d = steady_alpha(p, stationary_r(p)).theta_d_required;
  const FlowState fp = flow_fixed_point(p);
  const auto traj = flow_integrate(fp, p, 200.0);
  for (const auto& s : traj.states) {
    EXPECT_NEAR(s.r, fp.r, 1e-9);
    EXPECT_NEAR(s.phi, fp.phi, 1e-9);
    EXPECT_LT(std::abs(s.alpha - fp.alpha), 1e-9);
  }
}

TEST(Flow, PerturbedDisplacementDecaysAtHalfKappa) {
  ModelParams p = fig5(0.001);
  p.kappa_b = 0.02;
  p.theta_d = steady_alpha(p, stationary_r(p)).theta_d_required;
  const FlowState fp = flow_fixed_point(p);
  FlowState s0 = fp;
  s0.alpha += cplx(0.01, -0.005);
  const double horizon = 300.0;
  const auto traj = flow_integrate(s0, p, horizon);
  const double d0 = std::abs(s0.alpha - fp.alpha);
  const double expect = d0 * std::exp(-0.5 * p.kappa_b * horizon);
  EXPECT_NEAR(traj.terminal_alpha_error / expect, 1.0, 0.1);
}

TEST(Flow, RadiusStationaryOnPhiEqualsPi) {
  ModelParams p = fig5();
  for (double r0 : {0.3, 1.0, 1.5}) EXPECT_LT(std::abs(flow_rhs(FlowState{r0, kPi, 0.0}, p).dr), 1e-15);
}

TEST(Flow, OffStationaryRadiusLeavesPhiEqualsPi) {
  // phi = pi is invariant only at the stationary radius: phi-dot there is
  // 4 Omega_p coth 2r - 2 Delta_b, which vanishes at r* alone.
  ModelParams p = fig5();
  const auto traj = flow_integrate(FlowState{0.3, kPi, 0.0}, p, 50.0);
  EXPECT_GT(std::abs(traj.states.back().phi - kPi), 1e-3);
}

TEST(Flow, ConservedFrequency) {
  // Delta_b cosh 2r - 2 Omega_p cos(theta_p + phi) sinh 2r is a first integral
  // of the (r, phi) equations.
  ModelParams p = fig5();
  for (double r0 : {0.3, 1.0, 1.5}) {
    const auto traj = flow_integrate(FlowState{r0, kPi, 0.0}, p, 50.0);
    const double f0 = omega_b_eff_hyperbolic(p.delta_b, p.omega_p2, r0, p.theta_p, kPi);
    for (const auto& s : traj.states)
      EXPECT_NEAR(omega_b_eff_hyperbolic(p.delta_b, p.omega_p2, s.r, p.theta_p, s.phi), f0, 1e-7 * std::abs(f0));
  }
}

TEST(AnalyticParams, NoSqueezingLimit) {
  DerivedParams d;
  d.omega_b_eff = 0.3;
  d.g2 = 0.0;
  const AnalyticParams a = analytic_params(d);
  EXPECT_EQ(a.eta1, 0.0);
  EXPECT_EQ(a.varpi1, 0.3);
}

TEST(AnalyticParams, CaptionValues) {
  const DerivedParams d = effective_params(fig5());
  const AnalyticParams a = analytic_params(d);
  EXPECT_NEAR(a.eta1, kEta1, 1e-11);
  EXPECT_NEAR(a.varpi1 / d.omega_b_eff, std::sqrt(1.5), 1e-12);
  EXPECT_NEAR(a.t_c(0), kTc, 1e-8);
  EXPECT_NEAR(a.t_c(0), kPi / std::sqrt((d.omega_b_eff + 4 * d.g2) * d.omega_b_eff), 1e-12);
  EXPECT_NEAR(a.t_c(0) * a.varpi1, kPi, 1e-14);
  EXPECT_NEAR(a.t_s(0) * a.varpi1, kPi / 2, 1e-14);
  EXPECT_NEAR(a.t_c(2), 5 * a.t_c(0), 1e-12);
}
