#pragma once

#include <span>
#include <vector>

#include "fbcom/dynamics.hpp"

namespace fbcom {

enum class Direction { a_to_b, b_to_a };
enum class Quadrature { X, Y };

/// Which determinant enters the eta^- radicand and the steering denominator.
enum class DeterminantReading {
  /// Determinant of the full 4x4 covariance matrix (standard Gaussian formulas).
  full_matrix,
  /// Determinant of the 2x2 correlation block, kept for diagnostics only.
  correlation_block,
};

/// Tolerance below 1/2 accepted on the smallest symplectic eigenvalue.
inline constexpr double kPhysicalityTolerance = 1e-6;

[[nodiscard]] double det2(const Mat2& m);
/// Cofactor expansion of a 4x4 determinant.
[[nodiscard]] double det4(const Mat4& m);

/// Smallest symplectic eigenvalue of V (>= 1/2 on physical states).
[[nodiscard]] double min_symplectic_eigenvalue(const CovarianceMatrix& v);
/// Smallest symplectic eigenvalue of the partially transposed V.
[[nodiscard]] double min_pt_symplectic_eigenvalue(const CovarianceMatrix& v,
                                                  DeterminantReading reading =
                                                      DeterminantReading::full_matrix);

/// -ln(2 eta^-) without the clamp at zero.
[[nodiscard]] double log_negativity_raw(const CovarianceMatrix& v,
                                        DeterminantReading reading =
                                            DeterminantReading::full_matrix);
[[nodiscard]] double log_negativity(const CovarianceMatrix& v,
                                    DeterminantReading reading = DeterminantReading::full_matrix);

/// 1/2 ln(det V_steerer / (4 det V)) without the clamp at zero.
[[nodiscard]] double steering_raw(const CovarianceMatrix& v, Direction dir,
                                  DeterminantReading reading = DeterminantReading::full_matrix);
[[nodiscard]] double steering(const CovarianceMatrix& v, Direction dir,
                              DeterminantReading reading = DeterminantReading::full_matrix);

/// Squeezing of one quadrature of a single-mode block, in dB relative to vacuum.
[[nodiscard]] double quadrature_squeezing(const Mat2& block, Quadrature which);
/// Squeezing along the most squeezed quadrature, -10 log10(2 lambda_min).
[[nodiscard]] double optimal_squeezing(const Mat2& block);
/// 1 / (2 sqrt(det V_b)).
[[nodiscard]] double purity(const Mat2& block);

/// All scalar measures of one covariance matrix at time t.
struct CorrelationRecord {
  double t = 0.0;
  double E_N = 0.0;
  double G_ab = 0.0;
  double G_ba = 0.0;
  double S_b = 0.0;
  double mu_b = 1.0;
  // Unclamped values, used for zero-level contours and maxima refinement.
  double E_N_raw = 0.0;
  double G_ab_raw = 0.0;
  double G_ba_raw = 0.0;
  double min_symplectic = 0.5;
};

[[nodiscard]] CorrelationRecord evaluate(const CovarianceMatrix& v, double t,
                                         DeterminantReading reading =
                                             DeterminantReading::full_matrix);

struct MeasureMaximum {
  double value = 0.0;
  double t = 0.0;
};

/// Per-period maxima of every measure and the times at which they occur.
struct PeriodicMaxima {
  MeasureMaximum E_N, G_ab, G_ba, S_b, mu_b;
  MeasureMaximum E_N_raw, G_ab_raw, G_ba_raw;
  double min_symplectic = 0.5;
};

/// Reduces records sampled uniformly over exactly one period tau (start
/// included, end excluded) to per-measure maxima. With `refine`, each maximum
/// is refined by a parabola through the discrete arg-max and its periodic
/// neighbours.
[[nodiscard]] PeriodicMaxima periodic_maxima(std::span<const CorrelationRecord> records,
                                             double tau, bool refine = true);

}  // namespace fbcom
