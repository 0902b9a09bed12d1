#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fbcom/model.hpp"

namespace fbcom {

// Flat key = value parameter files.
//
//   # comment
//   kappa_a_over_2pi_hz = 0.5e6
//   G_c_over_omega_b    = 0.02
//   omega_m_over_delta_c = 1.7
//
// Keys name one physical quantity each; several keys may describe the same
// quantity (SI and dimensionless forms, ratios), in which case a single file
// must give consistent values. Overrides replace whatever the file said
// about that quantity.

struct ConfigEntry {
  std::string key;
  std::string value;
  /// "path:line" for file entries, "--set" for overrides.
  std::string origin;
};

struct ParamConfig {
  std::vector<ConfigEntry> file_entries;
  std::vector<ConfigEntry> overrides;
  double laser_wavelength_m = 1550e-9;
};

[[nodiscard]] ParamConfig parse_config(std::istream& in, const std::string& origin);
[[nodiscard]] ParamConfig load_config_file(const std::filesystem::path& path);

/// Appends one "key=value" override; throws SpecError on malformed text or unknown key.
void add_override(ParamConfig& cfg, std::string_view assignment);

/// Applies file entries and then overrides (in order) on top of `base`.
[[nodiscard]] SystemParams resolve(const ParamConfig& cfg, const SystemParams& base = default_params());

[[nodiscard]] std::vector<std::string> known_keys();

/// Canonical dimensionless form, one key per line, values printed with %.17g.
/// Feeding it back through parse_config + resolve reproduces `p` exactly.
void write_config(std::ostream& out, const SystemParams& p);
[[nodiscard]] std::string canonical_config(const SystemParams& p);

/// FNV-1a over canonical_config(p), as 16 hex digits.
[[nodiscard]] std::string params_hash(const SystemParams& p);
[[nodiscard]] std::uint64_t fnv1a(std::string_view text);

}  // namespace fbcom
