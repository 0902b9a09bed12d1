#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbcom/limit_cycle.hpp"
#include "fbcom/measures.hpp"
#include "fbcom/model.hpp"

namespace fbcom {

enum class Verdict { ok, unstable, not_converged, quasi_periodic };

[[nodiscard]] std::string_view to_string(Verdict v);
/// Throws SpecError for unknown names.
[[nodiscard]] Verdict verdict_from_string(std::string_view name);

struct PipelineSettings {
  CycleSettings cycle{};
  DeterminantReading reading = DeterminantReading::full_matrix;
};

/// Per-cell diagnostics. Fields that could not be computed hold NaN.
struct CellDiagnostics {
  double kappa_fb = 0.0;
  double tau = 0.0;
  double settle_time = 0.0;
  double poincare_residual = 0.0;
  double cooperativity = 0.0;
  double power_balance_residual = 0.0;
  double max_re_eig = 0.0;
  double dominant_phonon_re = 0.0;
  /// Growth rate of the covariance norm when an integration diverged.
  double growth_rate = 0.0;
  double mean_abs_alpha = 0.0;
  double mean_photon_number = 0.0;
};

struct CellResult {
  Verdict verdict = Verdict::ok;
  std::string message;
  PeriodicMaxima maxima{};
  CellDiagnostics diagnostics{};
};

/// Everything a single-point run produces, including the sampled cycle.
struct PointRun {
  CellResult result;
  std::optional<LimitCycle> cycle;
  std::vector<CorrelationRecord> records;
};

/// Settles the periodic steady state, checks stability, evaluates the
/// measures over one period and reduces them to per-period maxima.
/// Failures become verdicts; only SpecError-class problems propagate.
[[nodiscard]] PointRun run_point(const SystemParams& params, const PipelineSettings& settings = {});
[[nodiscard]] CellResult evaluate_point(const SystemParams& params,
                                        const PipelineSettings& settings = {});

}  // namespace fbcom
