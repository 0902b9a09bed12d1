#pragma once

#include <Eigen/Core>
#include <chrono>
#include <memory>
#include <vector>

#include "fbcom/dynamics.hpp"
#include "fbcom/model.hpp"
#include "fbcom/ode.hpp"

namespace fbcom {

/// Packed integration state: Re alpha, Im alpha, Re beta, Im beta, then V column-major.
inline constexpr int kStateSize = 20;
using PackedState = Eigen::Matrix<double, kStateSize, 1>;

[[nodiscard]] PackedState pack(const MeanFieldState& m, const CovarianceMatrix& v);
[[nodiscard]] MeanFieldState unpack_mean_field(const PackedState& y, double t);
[[nodiscard]] CovarianceMatrix unpack_covariance(const PackedState& y);

/// Joint time derivative of (alpha, beta, V).
[[nodiscard]] PackedState coupled_rhs(double t, const PackedState& y, const SystemParams& p,
                                      const DiffusionMatrix& d);

enum class InitialCondition {
  /// alpha = beta = 0, photon vacuum, phonon thermal at N_b.
  quiescent,
  /// Static-drive estimate for alpha, zero beta, vacuum V; used to probe basin independence.
  alternate,
};

struct IntegratorSettings {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 0.5;
  /// Deterministic cap on integrator steps; <= 0 disables.
  long max_steps = 0;
  /// Covariance entries beyond this mean the fluctuations are running away.
  double covariance_blowup = 1e8;
  InitialCondition initial = InitialCondition::quiescent;
};

[[nodiscard]] PackedState initial_state(const SystemParams& p, InitialCondition ic);

/// One stored sample of the joint evolution, with its time derivative for Hermite interpolation.
struct TrajectorySample {
  double t = 0.0;
  PackedState y = PackedState::Zero();
  PackedState dy = PackedState::Zero();
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  [[nodiscard]] std::vector<MeanFieldState> mean_field() const;
  [[nodiscard]] std::vector<CovarianceMatrix> covariance() const;
  /// Cubic Hermite interpolation between the bracketing stored samples.
  [[nodiscard]] PackedState interpolate(double t) const;
  [[nodiscard]] double t_begin() const { return samples.front().t; }
  [[nodiscard]] double t_end() const { return samples.back().t; }
};

/// Stateful joint integrator of the mean field and the covariance matrix.
class CoupledEvolution {
 public:
  CoupledEvolution(const SystemParams& params, const IntegratorSettings& settings);
  CoupledEvolution(const SystemParams& params, const IntegratorSettings& settings, double t0,
                   const PackedState& y0);
  ~CoupledEvolution();
  CoupledEvolution(CoupledEvolution&&) noexcept;
  CoupledEvolution& operator=(CoupledEvolution&&) noexcept;

  void advance_to(double t);
  /// Wall-clock deadline checked while stepping; exceeding it raises NotConvergedError.
  void set_deadline(std::chrono::steady_clock::time_point deadline);
  [[nodiscard]] double time() const;
  [[nodiscard]] const PackedState& state() const;
  [[nodiscard]] const PackedState& derivative() const;
  [[nodiscard]] TrajectorySample sample() const;
  [[nodiscard]] long steps() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Integrates from the configured initial condition up to t_end, storing a
/// sample every `stride` time units (plus both end points).
[[nodiscard]] Trajectory integrate(const SystemParams& params, double t_end, double stride,
                                   const IntegratorSettings& settings = {});

}  // namespace fbcom
