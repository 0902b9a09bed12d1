#pragma once

#include <Eigen/Core>
#include <complex>

#include "fbcom/model.hpp"

namespace fbcom {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;

/// Mean cavity and mechanical amplitudes <a>, <b> at time t.
struct MeanFieldState {
  double t = 0.0;
  cplx alpha{};
  cplx beta{};

  [[nodiscard]] double photon_number() const { return std::norm(alpha); }
};

struct MeanFieldDerivative {
  cplx d_alpha{};
  cplx d_beta{};
};

/// Drift matrix of the linearised quadrature fluctuations (dX_a, dY_a, dX_b, dY_b).
struct DriftMatrix {
  Mat4 entries = Mat4::Zero();
  double t = 0.0;
};

/// Diagonal noise-input matrix of the covariance equation.
struct DiffusionMatrix {
  Eigen::Vector4d diagonal = Eigen::Vector4d::Zero();

  [[nodiscard]] Mat4 dense() const { return diagonal.asDiagonal(); }
};

/// Symmetric 4x4 quadrature covariance; vacuum is I/2.
struct CovarianceMatrix {
  Mat4 entries = 0.5 * Mat4::Identity();

  [[nodiscard]] Mat2 block_a() const { return entries.topLeftCorner<2, 2>(); }
  [[nodiscard]] Mat2 block_b() const { return entries.bottomRightCorner<2, 2>(); }
  [[nodiscard]] Mat2 block_ab() const { return entries.topRightCorner<2, 2>(); }

  void symmetrize() { entries = 0.5 * (entries + entries.transpose()).eval(); }

  static CovarianceMatrix from_blocks(const Mat2& va, const Mat2& vb, const Mat2& vab);
  static CovarianceMatrix vacuum() { return {}; }
  /// Photon vacuum, phonon thermal with occupation n_b.
  static CovarianceMatrix thermal(double n_a, double n_b);
};

/// Right-hand side of the noise-free mean-field equations.
[[nodiscard]] MeanFieldDerivative mean_field_rhs(const MeanFieldState& state,
                                                 const SystemParams& params);

/// A(t) evaluated on the mean-field state.
[[nodiscard]] DriftMatrix build_drift_matrix(const MeanFieldState& state,
                                             const SystemParams& params);

[[nodiscard]] DiffusionMatrix build_diffusion_matrix(const SystemParams& params);

/// A V + V A^T + D.
[[nodiscard]] Mat4 covariance_rhs(const Mat4& drift, const Mat4& cov, const DiffusionMatrix& d);

}  // namespace fbcom
