#include "fbcom/dynamics.hpp"

#include <cmath>

namespace fbcom {

CovarianceMatrix CovarianceMatrix::from_blocks(const Mat2& va, const Mat2& vb, const Mat2& vab) {
  CovarianceMatrix v;
  v.entries.topLeftCorner<2, 2>() = va;
  v.entries.bottomRightCorner<2, 2>() = vb;
  v.entries.topRightCorner<2, 2>() = vab;
  v.entries.bottomLeftCorner<2, 2>() = vab.transpose();
  return v;
}

CovarianceMatrix CovarianceMatrix::thermal(double n_a, double n_b) {
  CovarianceMatrix v;
  v.entries = Eigen::Vector4d(n_a + 0.5, n_a + 0.5, n_b + 0.5, n_b + 0.5).asDiagonal();
  return v;
}

MeanFieldDerivative mean_field_rhs(const MeanFieldState& s, const SystemParams& p) {
  const DerivedParams d = derive(p);
  const cplx i{0.0, 1.0};
  const cplx opa_phase = std::polar(1.0, -(p.delta_c * s.t - p.theta_c));
  const cplx mpa_phase = std::polar(1.0, -(p.omega_m * s.t - p.theta_m));
  const double x_b = 2.0 * s.beta.real();

  MeanFieldDerivative out;
  out.d_alpha = -(i * d.delta_fb + d.kappa_fb) * s.alpha + i * p.g * s.alpha * x_b +
                2.0 * p.G_c * std::conj(s.alpha) * opa_phase + d.t_b * p.E;
  out.d_beta = -(i * SystemParams::omega_b() + p.kappa_b) * s.beta + i * p.g * std::norm(s.alpha) +
               2.0 * p.G_m * std::conj(s.beta) * mpa_phase;
  return out;
}

DriftMatrix build_drift_matrix(const MeanFieldState& s, const SystemParams& p) {
  const double kappa_fb = effective_decay(p.kappa_a, p.r_b, p.theta);
  const double delta_eff =
      p.delta_a - p.g * 2.0 * s.beta.real() - 2.0 * p.kappa_a * p.r_b * std::sin(p.theta);
  const double opa_freq = p.variant.opa_phase_uses_delta_a ? p.delta_a : p.delta_c;
  const double phi_a = opa_freq * s.t - p.theta_c;
  const double phi_m = p.omega_m * s.t - p.theta_m;
  const double gamma_a = 2.0 * p.G_c * std::cos(phi_a);
  const double zeta_a = 2.0 * p.G_c * std::sin(phi_a);
  const double gamma_m = 2.0 * p.G_m * std::cos(phi_m);
  const double zeta_m = 2.0 * p.G_m * std::sin(phi_m);
  const cplx coupling = p.g * s.alpha;
  const double gx = coupling.real();
  const double gy = coupling.imag();
  const double omega_b = SystemParams::omega_b();
  const double lower_freq = p.variant.literal_omega_m_entry ? p.omega_m : omega_b;

  DriftMatrix a;
  a.t = s.t;
  // clang-format off
  a.entries <<
      -kappa_fb + gamma_a,   delta_eff - zeta_a,   -2.0 * gy,             0.0,
      -delta_eff - zeta_a,   -kappa_fb - gamma_a,   2.0 * gx,             0.0,
       0.0,                   0.0,                 -p.kappa_b + gamma_m,  omega_b - zeta_m,
       2.0 * gx,              2.0 * gy,            -lower_freq - zeta_m,  -p.kappa_b - gamma_m;
  // clang-format on
  return a;
}

DiffusionMatrix build_diffusion_matrix(const SystemParams& p) {
  const double tb2 = 1.0 - p.r_b * p.r_b;
  const double loop = 1.0 - 2.0 * p.r_b * std::cos(p.theta) + p.r_b * p.r_b;
  const double d_a = p.kappa_a * tb2 * loop * (2.0 * p.n_a + 1.0);
  const double d_b = p.kappa_b * (2.0 * p.n_b + 1.0);
  DiffusionMatrix d;
  d.diagonal << d_a, d_a, d_b, d_b;
  return d;
}

Mat4 covariance_rhs(const Mat4& drift, const Mat4& cov, const DiffusionMatrix& d) {
  Mat4 av = drift * cov;
  Mat4 out = av + av.transpose();
  out.diagonal() += d.diagonal;
  return out;
}

}  // namespace fbcom
