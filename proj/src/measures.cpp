#include "fbcom/measures.hpp"

#include <algorithm>
#include <cmath>
#include <Eigen/Eigenvalues>
#include <string>

#include "fbcom/errors.hpp"

namespace fbcom {

namespace {

constexpr double kRadicandTolerance = 1e-12;

/// sqrt of a quantity that is non-negative in exact arithmetic; small
/// negative rounding (relative to `scale`) is clamped, anything beyond raises.
double guarded_sqrt(double x, double scale, const char* what) {
  if (x >= 0.0) return std::sqrt(x);
  if (x >= -kRadicandTolerance * std::max(1.0, scale)) return 0.0;
  throw NumericalDegeneracyError(std::string("negative radicand in ") + what + ": " +
                                 std::to_string(x));
}

/// Two-mode symplectic invariants: smallest root of nu^4 - delta nu^2 + det = 0.
double smallest_symplectic(double delta, double det_v, const char* what) {
  const double r = guarded_sqrt(delta * delta - 4.0 * det_v, delta * delta, what);
  const double denom = delta + r;
  if (!(denom > 0.0)) throw NumericalDegeneracyError(std::string("degenerate ") + what);
  // (delta - r)/2 rewritten as 2 det / (delta + r) to avoid cancellation.
  const double nu2 = 2.0 * det_v / denom;
  return std::sqrt(std::max(nu2, 0.0));
}

void require_physical(const CovarianceMatrix& v) {
  const double nu = min_symplectic_eigenvalue(v);
  if (nu < 0.5 - kPhysicalityTolerance) {
    throw DomainError("unphysical covariance matrix: smallest symplectic eigenvalue " +
                      std::to_string(nu));
  }
}

double correlation_determinant(const CovarianceMatrix& v, DeterminantReading reading) {
  return reading == DeterminantReading::full_matrix ? det4(v.entries) : det2(v.block_ab());
}

}  // namespace

double det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

double det4(const Mat4& m) {
  // Laplace expansion along the first two rows using 2x2 minors.
  const double s0 = m(0, 0) * m(1, 1) - m(1, 0) * m(0, 1);
  const double s1 = m(0, 0) * m(1, 2) - m(1, 0) * m(0, 2);
  const double s2 = m(0, 0) * m(1, 3) - m(1, 0) * m(0, 3);
  const double s3 = m(0, 1) * m(1, 2) - m(1, 1) * m(0, 2);
  const double s4 = m(0, 1) * m(1, 3) - m(1, 1) * m(0, 3);
  const double s5 = m(0, 2) * m(1, 3) - m(1, 2) * m(0, 3);
  const double c5 = m(2, 2) * m(3, 3) - m(3, 2) * m(2, 3);
  const double c4 = m(2, 1) * m(3, 3) - m(3, 1) * m(2, 3);
  const double c3 = m(2, 1) * m(3, 2) - m(3, 1) * m(2, 2);
  const double c2 = m(2, 0) * m(3, 3) - m(3, 0) * m(2, 3);
  const double c1 = m(2, 0) * m(3, 2) - m(3, 0) * m(2, 2);
  const double c0 = m(2, 0) * m(3, 1) - m(3, 0) * m(2, 1);
  return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
}

double min_symplectic_eigenvalue(const CovarianceMatrix& v) {
  // nu^2 are the eigenvalues of -(S Omega S)^2 with S = V^{1/2}. Unlike the
  // invariant formula this stays accurate when both nu coincide (pure states).
  const Eigen::SelfAdjointEigenSolver<Mat4> sqrt_v(v.entries);
  if (!(sqrt_v.eigenvalues().minCoeff() > 0.0)) return 0.0;
  const Mat4 s = sqrt_v.operatorSqrt();
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = omega(2, 3) = 1.0;
  omega(1, 0) = omega(3, 2) = -1.0;
  const Mat4 m = s * omega * s;
  const Mat4 m2 = m.transpose() * m;
  const double nu2 = Eigen::SelfAdjointEigenSolver<Mat4>(0.5 * (m2 + m2.transpose()),
                                                         Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .minCoeff();
  return std::sqrt(std::max(nu2, 0.0));
}

double min_pt_symplectic_eigenvalue(const CovarianceMatrix& v, DeterminantReading reading) {
  const double sigma = det2(v.block_a()) + det2(v.block_b()) - 2.0 * det2(v.block_ab());
  return smallest_symplectic(sigma, correlation_determinant(v, reading),
                             "partially transposed spectrum");
}

double log_negativity_raw(const CovarianceMatrix& v, DeterminantReading reading) {
  if (reading == DeterminantReading::full_matrix) require_physical(v);
  const double eta = min_pt_symplectic_eigenvalue(v, reading);
  if (!(eta > 0.0)) throw DomainError("vanishing symplectic eigenvalue in log-negativity");
  return -std::log(2.0 * eta);
}

double log_negativity(const CovarianceMatrix& v, DeterminantReading reading) {
  return std::max(0.0, log_negativity_raw(v, reading));
}

double steering_raw(const CovarianceMatrix& v, Direction dir, DeterminantReading reading) {
  if (reading == DeterminantReading::full_matrix) require_physical(v);
  const double steerer = det2(dir == Direction::a_to_b ? v.block_a() : v.block_b());
  const double denom = 4.0 * correlation_determinant(v, reading);
  if (!(denom > 0.0) || !(steerer > 0.0)) {
    throw DomainError("steering undefined: non-positive determinant");
  }
  return 0.5 * std::log(steerer / denom);
}

double steering(const CovarianceMatrix& v, Direction dir, DeterminantReading reading) {
  return std::max(0.0, steering_raw(v, dir, reading));
}

double quadrature_squeezing(const Mat2& block, Quadrature which) {
  const double var = which == Quadrature::X ? block(0, 0) : block(1, 1);
  if (!(var > 0.0)) throw DomainError("quadrature variance must be positive");
  return -10.0 * std::log10(var / 0.5);
}

double optimal_squeezing(const Mat2& block) {
  const double a = block(0, 0);
  const double d = block(1, 1);
  const double b = 0.5 * (block(0, 1) + block(1, 0));
  const double half_diff = 0.5 * (a - d);
  const double lambda_min = 0.5 * (a + d) - std::hypot(half_diff, b);
  if (!(lambda_min > 0.0)) throw DomainError("block is not positive definite");
  return -10.0 * std::log10(2.0 * lambda_min);
}

double purity(const Mat2& block) {
  const double det = det2(block);
  if (det < 0.25 - 1e-9) throw DomainError("unphysical single-mode block: det < 1/4");
  return std::min(1.0, 1.0 / (2.0 * std::sqrt(std::max(det, 0.25))));
}

CorrelationRecord evaluate(const CovarianceMatrix& v, double t, DeterminantReading reading) {
  CorrelationRecord r;
  r.t = t;
  r.min_symplectic = min_symplectic_eigenvalue(v);
  r.E_N_raw = log_negativity_raw(v, reading);
  r.G_ab_raw = steering_raw(v, Direction::a_to_b, reading);
  r.G_ba_raw = steering_raw(v, Direction::b_to_a, reading);
  r.E_N = std::max(0.0, r.E_N_raw);
  r.G_ab = std::max(0.0, r.G_ab_raw);
  r.G_ba = std::max(0.0, r.G_ba_raw);
  const Mat2 vb = v.block_b();
  r.S_b = optimal_squeezing(vb);
  r.mu_b = purity(vb);
  return r;
}

namespace {

template <class Get>
MeasureMaximum max_of(std::span<const CorrelationRecord> recs, double dt, bool refine, Get get) {
  const std::size_t n = recs.size();
  std::size_t k = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (get(recs[i]) > get(recs[k])) k = i;
  }
  MeasureMaximum m{get(recs[k]), recs[k].t};
  if (!refine) return m;
  const double ym = get(recs[(k + n - 1) % n]);
  const double y0 = get(recs[k]);
  const double yp = get(recs[(k + 1) % n]);
  const double curvature = ym - 2.0 * y0 + yp;
  if (curvature < 0.0) {
    const double offset = 0.5 * (ym - yp) / curvature;
    if (std::abs(offset) <= 1.0) {
      m.value = y0 - 0.25 * (ym - yp) * offset;
      m.t = recs[k].t + offset * dt;
    }
  }
  return m;
}

MeasureMaximum clamp_at_zero(MeasureMaximum m) {
  m.value = std::max(0.0, m.value);
  return m;
}

}  // namespace

PeriodicMaxima periodic_maxima(std::span<const CorrelationRecord> records, double tau,
                               bool refine) {
  const std::size_t n = records.size();
  if (n < 3) throw CoverageError("need at least three samples per period");
  if (!(tau > 0.0)) throw CoverageError("period must be positive");
  const double dt = tau / static_cast<double>(n);
  const double t0 = records.front().t;
  for (std::size_t k = 0; k < n; ++k) {
    const double expected = t0 + static_cast<double>(k) * dt;
    if (std::abs(records[k].t - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw CoverageError("samples are not uniform over exactly one period");
    }
  }

  PeriodicMaxima out;
  out.E_N_raw = max_of(records, dt, refine, [](const auto& r) { return r.E_N_raw; });
  out.G_ab_raw = max_of(records, dt, refine, [](const auto& r) { return r.G_ab_raw; });
  out.G_ba_raw = max_of(records, dt, refine, [](const auto& r) { return r.G_ba_raw; });
  out.E_N = clamp_at_zero(out.E_N_raw);
  out.G_ab = clamp_at_zero(out.G_ab_raw);
  out.G_ba = clamp_at_zero(out.G_ba_raw);
  out.S_b = max_of(records, dt, refine, [](const auto& r) { return r.S_b; });
  out.mu_b = max_of(records, dt, refine, [](const auto& r) { return r.mu_b; });
  out.mu_b.value = std::min(1.0, out.mu_b.value);
  out.min_symplectic = records.front().min_symplectic;
  for (const auto& r : records) out.min_symplectic = std::min(out.min_symplectic, r.min_symplectic);
  return out;
}

}  // namespace fbcom
