#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbcom/model.hpp"
#include "fbcom/pipeline.hpp"

namespace fbcom {

/// Parameters a sweep axis can drive. The two ratio quantities expand to
/// omega_m = ratio * delta_c and G_m = ratio * G_c with the denominator held fixed.
enum class Quantity {
  r_b, theta, theta_c, theta_m, G_c, G_m, E, delta_a, delta_c, omega_m,
  kappa_a, kappa_b, g, temperature_k, n_a, omega_m_over_delta_c, G_m_over_G_c,
};

struct ParameterPath {
  Quantity quantity;
  std::string name;
  std::string units;

  [[nodiscard]] bool is_ratio() const {
    return quantity == Quantity::omega_m_over_delta_c || quantity == Quantity::G_m_over_G_c;
  }
};

/// Throws SpecError for names that do not resolve.
[[nodiscard]] ParameterPath parse_parameter_path(std::string_view name);
[[nodiscard]] std::vector<std::string> parameter_path_names();
void apply_path(SystemParams& p, const ParameterPath& path, double value);

enum class Measure { E_N, G_ab, G_ba, S_b, mu_b };
[[nodiscard]] std::string_view to_string(Measure m);
[[nodiscard]] Measure measure_from_string(std::string_view name);
[[nodiscard]] double measure_value(const PeriodicMaxima& m, Measure which);

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

/// n points from first to last inclusive (n >= 1).
[[nodiscard]] std::vector<double> linspace(double first, double last, int n);

struct SweepSpec {
  std::string name = "custom";
  SystemParams base = default_params();
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  std::vector<Measure> outputs{Measure::E_N};
  PipelineSettings pipeline{};
  /// Frequency ratios omega_m/delta_c are snapped to p/q with q at most this.
  int max_snap_denominator = 64;
};

/// Throws SpecError on unresolvable paths, empty, non-finite or non-monotone axes, and on
/// cells whose parameters are invalid.
void validate_spec(const SweepSpec& spec);

/// Stable text identity of a spec; a checkpoint only resumes a run with the same fingerprint.
[[nodiscard]] std::string spec_fingerprint(const SweepSpec& spec);

struct SweepCell {
  std::size_t index = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  double x1 = 0.0;
  /// NaN on 1D sweeps.
  double x2 = 0.0;
  SystemParams params;
  double snap_distance = 0.0;
};

/// Cells in output order: index = i * n2 + j with i along axis1.
[[nodiscard]] std::vector<SweepCell> expand_cells(const SweepSpec& spec);

struct SweepResult {
  SweepSpec spec;
  std::vector<SweepCell> cells;
  /// One slot per cell; empty when a run was stopped early.
  std::vector<std::optional<CellResult>> results;
  /// Wall seconds per cell, NaN for cells restored from a checkpoint.
  std::vector<double> cell_wall_s;
  double wall_s = 0.0;
  int workers = 1;

  [[nodiscard]] bool complete() const;
  [[nodiscard]] std::size_t n1() const { return spec.axis1.values.size(); }
  [[nodiscard]] std::size_t n2() const { return spec.axis2 ? spec.axis2->values.size() : 1; }
};

struct SweepOptions {
  /// <= 0 uses the OpenMP default.
  int workers = 0;
  /// Append-only log of finished cells; empty disables checkpointing.
  std::filesystem::path checkpoint;
  /// Reuse cells already present in the checkpoint.
  bool resume = false;
  /// Stop after this many newly computed cells (< 0: run everything).
  long stop_after = -1;
};

/// Cells distributed over OpenMP threads; a single writer appends to the checkpoint.
[[nodiscard]] SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options = {});
/// Plain loop over the same cells, kept as the reference for the parallel path.
[[nodiscard]] SweepResult run_sweep_serial(const SweepSpec& spec, const SweepOptions& options = {});

// Figure presets.

[[nodiscard]] std::vector<std::string> preset_names();
/// n1, n2 override the default resolution (41 x 41 for 2D, 81 for 1D); zeros keep the default.
[[nodiscard]] SweepSpec figure_preset(std::string_view name, int n1 = 0, int n2 = 0);

// Zero-level contours.

struct Polyline {
  std::vector<std::pair<double, double>> points;
  bool closed = false;
};

/// Marching squares on a row-major field f[i * ny + j] over (x[i], y[j]).
/// Squares touching a NaN are skipped. Segments are joined into polylines.
[[nodiscard]] std::vector<Polyline> contour_lines(const std::vector<double>& x,
                                                  const std::vector<double>& y,
                                                  const std::vector<double>& f, double level = 0.0);

}  // namespace fbcom
