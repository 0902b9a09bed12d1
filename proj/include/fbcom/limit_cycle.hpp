#pragma once

#include <cstdint>
#include <vector>

#include "fbcom/dynamics.hpp"
#include "fbcom/simulation.hpp"

namespace fbcom {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// First continued-fraction convergent p/q of x with |x - p/q| <= tol * max(1, |x|).
/// Throws QuasiPeriodicError if none exists with q <= max_den.
[[nodiscard]] Fraction rationalize(double x, double tol, std::int64_t max_den);

/// Closest fraction to x with denominator at most max_den (x >= 0).
[[nodiscard]] Fraction best_rational(double x, std::int64_t max_den);

/// Common period of the OPA and MPA modulations.
struct ModulationPeriod {
  double tau = 0.0;
  /// omega_m / Delta_c = ratio.num / ratio.den when both pumps are on.
  Fraction ratio{};
  /// No explicit time dependence: every tau is a period.
  bool constant = false;
};

[[nodiscard]] ModulationPeriod modulation_period(const SystemParams& p, double rational_tol = 1e-9,
                                                 std::int64_t max_den = 4096);

/// One period of the asymptotic orbit, sampled uniformly (start included, end excluded).
struct LimitCycle {
  double tau = 0.0;
  std::vector<MeanFieldState> orbit;
  std::vector<CovarianceMatrix> covariance;
  double poincare_residual = 0.0;
  /// Time integrated before sampling began.
  double settle_time = 0.0;
};

/// max_i |y_i(t + tau) - y_i(t)| / (1 + |y_i(t)|).
[[nodiscard]] double poincare_residual(const PackedState& start, const PackedState& end);

struct CycleSettings {
  IntegratorSettings integrator{.max_steps = 4'000'000};
  int samples_per_period = 128;
  double residual_tolerance = 1e-5;
  /// Integrated before the first periodicity check; <= 0 picks max(200, 4 tau).
  double transient_time = 0.0;
  /// Give up (not converged) once this much model time has elapsed.
  double max_time = 2.0e4;
  /// Wall-clock allowance in seconds; <= 0 disables.
  double wall_budget_s = 120.0;
  double rational_tol = 1e-9;
  std::int64_t max_denominator = 4096;
};

/// Checks the tail of a stored trajectory for tau-periodicity and returns its last period.
/// Throws QuasiPeriodicError or NotConvergedError.
[[nodiscard]] LimitCycle detect_limit_cycle(const Trajectory& traj, const SystemParams& params,
                                            const CycleSettings& settings = {});

/// Integrates through the transient, one period at a time, until the
/// Poincare residual drops below tolerance, then samples one period.
[[nodiscard]] LimitCycle settle_limit_cycle(const SystemParams& params,
                                            const CycleSettings& settings = {});

struct StabilityReport {
  bool stable = true;
  double max_re_eig = 0.0;
  /// Largest real part among eigenvalues whose eigenvectors weigh mostly on the phonon quadratures.
  double dominant_phonon_re = 0.0;
};

/// Instantaneous eigenvalues of A(t) on at least 64 points of the cycle.
[[nodiscard]] StabilityReport stability_check(const SystemParams& params, const LimitCycle& cycle);

/// Eigenvalue-based verdict for A at a single mean-field state.
[[nodiscard]] StabilityReport instantaneous_stability(const SystemParams& params,
                                                      const MeanFieldState& state);

/// Cycle-averaged photon-number balance 2 kappa_fb <|alpha|^2> = P_om + P_OPA + P_drv.
struct PowerBalance {
  double mean_photon_number = 0.0;
  double mean_abs_alpha = 0.0;
  double lhs = 0.0;
  double p_om = 0.0;
  double p_opa = 0.0;
  double p_drv = 0.0;
  double residual = 0.0;
};

[[nodiscard]] PowerBalance power_balance(const LimitCycle& cycle, const SystemParams& params);
[[nodiscard]] double power_balance_residual(const LimitCycle& cycle, const SystemParams& params);

}  // namespace fbcom
