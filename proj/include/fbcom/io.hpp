#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fbcom/config.hpp"
#include "fbcom/pipeline.hpp"
#include "fbcom/simulation.hpp"
#include "fbcom/sweep.hpp"

namespace fbcom {

/// Version of every CSV/JSON file layout written below. Readers refuse other versions.
inline constexpr int kSchemaVersion = 1;

[[nodiscard]] std::string version();
[[nodiscard]] std::string utc_timestamp();

/// How an artifact directory came to be; recorded in its manifest.
struct RunInfo {
  std::string command;
  std::string params_file;
  std::vector<ConfigEntry> overrides;
  /// The only non-reproducible field of a manifest.
  std::string created_utc;
};

using Json = nlohmann::ordered_json;

[[nodiscard]] Json params_json(const SystemParams& p);
[[nodiscard]] Json settings_json(const PipelineSettings& s);
[[nodiscard]] Json run_info_json(const RunInfo& info);

/// Per-measure grid: axis1, axis2, value, verdict (value is nan unless verdict is ok).
void write_measure_csv(std::ostream& out, const SweepResult& r, Measure m);
void write_diagnostics_csv(std::ostream& out, const SweepResult& r);
/// Zero-level polylines of the raw steering maxima (2D sweeps only; header-only otherwise).
void write_contours_csv(std::ostream& out, const SweepResult& r);
void write_timing_csv(std::ostream& out, const SweepResult& r);
[[nodiscard]] Json sweep_manifest(const SweepResult& r, const RunInfo& info);

/// Writes every sweep artifact into `dir` (created if needed). Requires a complete result.
void write_sweep_artifacts(const SweepResult& r, const RunInfo& info,
                           const std::filesystem::path& dir);

/// Time series with a header carrying the params hash, integrator settings and units.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const SystemParams& p,
                          const IntegratorSettings& s);
/// One sampled period: mean field plus every measure at each sample.
void write_cycle_csv(std::ostream& out, const LimitCycle& cycle,
                     const std::vector<CorrelationRecord>& records, const SystemParams& p);
[[nodiscard]] Json cell_json(const CellResult& r);

/// Parses the first line "# fbcom schema_version=N ..." and throws SpecError unless N matches.
void check_schema_header(std::istream& in);

}  // namespace fbcom
