#include <gtest/gtest.h>

#include <random>

#include "fbcom/dynamics.hpp"
#include "fbcom/ode.hpp"
#include "fbcom/simulation.hpp"
#include "oracles.hpp"

using namespace fbcom;

namespace {

SystemParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p = default_params();
  p.r_b = 0.4 * u(rng);
  p.theta = kTwoPi * u(rng);
  p.G_c = 0.05 * u(rng);
  p.G_m = 0.05 * u(rng);
  p.theta_c = kTwoPi * u(rng);
  p.theta_m = kTwoPi * u(rng);
  p.delta_a = 2.0 * u(rng);
  p.omega_m = 3.0 * u(rng);
  return p;
}

MeanFieldState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {50.0 * std::abs(n(rng)), {3e4 * n(rng), 3e4 * n(rng)}, {1e3 * n(rng), 1e3 * n(rng)}};
}

}  // namespace

TEST(Drift, MatchesBruteForceExpansion) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const SystemParams p = random_params(rng);
    const MeanFieldState s = random_state(rng);
    const Mat4 a = build_drift_matrix(s, p).entries;
    const Mat4 ref = oracle::brute_force_drift(s, p);
    EXPECT_LE((a - ref).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + ref.cwiseAbs().maxCoeff())) << k;
  }
}

TEST(Drift, LiteralVariantOnlyTouchesOneEntry) {
  std::mt19937_64 rng(11);
  SystemParams p = random_params(rng);
  const MeanFieldState s = random_state(rng);
  const Mat4 a = build_drift_matrix(s, p).entries;
  p.variant.literal_omega_m_entry = true;
  Mat4 diff = build_drift_matrix(s, p).entries - a;
  EXPECT_NEAR(diff(3, 2), -(p.omega_m - 1.0), 1e-15);
  diff(3, 2) = 0.0;
  EXPECT_EQ(diff.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Diffusion, FeedbackNoiseCoefficient) {
  SystemParams p = default_params();
  p.n_b = 10.0;
  EXPECT_DOUBLE_EQ(build_diffusion_matrix(p).diagonal(0), p.kappa_a);
  EXPECT_DOUBLE_EQ(build_diffusion_matrix(p).diagonal(2), p.kappa_b * 21.0);
  p.r_b = 0.3;
  const double tb2 = 1.0 - 0.09;
  EXPECT_NEAR(build_diffusion_matrix(p).diagonal(1), p.kappa_a * tb2 * 0.49, 1e-15);
  p.r_b = 1.0 - 1e-12;
  EXPECT_LT(build_diffusion_matrix(p).diagonal(0), 1e-11);
}

TEST(MeanField, StaticDriveFixedPoint) {
  SystemParams p = default_params();
  p.g = 0.0;
  p.r_b = 0.2;
  p.theta = 0.4;
  const DerivedParams d = derive(p);
  const cplx alpha = d.t_b * p.E / cplx(d.kappa_fb, d.delta_fb);
  const MeanFieldDerivative dm = mean_field_rhs({3.0, alpha, {}}, p);
  EXPECT_LT(std::abs(dm.d_alpha), 1e-9 * std::abs(alpha));

  // The integrated field relaxes onto it.
  const Trajectory tr = integrate(p, 60.0, 60.0);
  EXPECT_LT(std::abs(tr.mean_field().back().alpha - alpha), 1e-6 * std::abs(alpha));
}

TEST(Covariance, RhsKeepsSymmetry) {
  std::mt19937_64 rng(3);
  const SystemParams p = random_params(rng);
  const Mat4 a = build_drift_matrix(random_state(rng), p).entries;
  Mat4 v = oracle::tmsv(0.4).entries;
  const Mat4 dv = covariance_rhs(a, v, build_diffusion_matrix(p));
  EXPECT_LE((dv - dv.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, PackRoundTrip) {
  const MeanFieldState m{0.0, {1.5, -2.0}, {0.25, 3.0}};
  const CovarianceMatrix v = oracle::tmsv(0.3);
  const PackedState y = pack(m, v);
  EXPECT_EQ(unpack_mean_field(y, 0.0).alpha, m.alpha);
  EXPECT_EQ(unpack_mean_field(y, 0.0).beta, m.beta);
  EXPECT_EQ(unpack_covariance(y).entries, v.entries);
}

// Constant drift: the integrated covariance must settle on the algebraic Lyapunov solution.
TEST(Lyapunov, IntegratedSteadyStateMatchesAlgebraicSolution) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Mat4 a = oracle::random_stable_drift(rng);
    DiffusionMatrix d;
    d.diagonal << u(rng), u(rng), u(rng), u(rng);
    const Mat4 ref = oracle::lyapunov_steady_state(a, d.dense());

    using Vec16 = Eigen::Matrix<double, 16, 1>;
    auto rhs = [&](double, const Vec16& y) {
      const Mat4 dv = covariance_rhs(a, Eigen::Map<const Mat4>(y.data()), d);
      return Vec16(Eigen::Map<const Vec16>(dv.data()));
    };
    const Mat4 v0 = 0.5 * Mat4::Identity();
    DormandPrince<16, decltype(rhs)> ode(rhs, 0.0, Eigen::Map<const Vec16>(v0.data()),
                                         StepControl{.rtol = 1e-11, .atol = 1e-13});
    ode.advance_to(400.0);
    const Mat4 v = Eigen::Map<const Mat4>(ode.state().data());
    EXPECT_LE((v - ref).norm(), 1e-6) << k;
  }
}
