#include "fbcom/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "fbcom/errors.hpp"

namespace fbcom {

namespace {

enum class Group {
  omega_b, kappa_a, kappa_b, delta_a, delta_c, omega_m, g, G_c, G_m,
  theta_c, theta_m, drive, wavelength, r_b, theta, thermal, n_a,
  literal_omega_m_entry, opa_phase_uses_delta_a,
};

// Resolution order: quantities others are expressed against come first.
constexpr Group kOrder[] = {
    Group::omega_b, Group::kappa_a, Group::kappa_b, Group::delta_a, Group::delta_c,
    Group::omega_m, Group::g, Group::G_c, Group::G_m, Group::theta_c, Group::theta_m,
    Group::wavelength, Group::drive, Group::r_b, Group::theta, Group::thermal, Group::n_a,
    Group::literal_omega_m_entry, Group::opa_phase_uses_delta_a,
};

struct Context {
  SystemParams p;
  double wavelength_m;
};

struct KeyInfo {
  Group group;
  // Converts the parsed number into the quantity's solver-unit value.
  std::function<double(double, const Context&)> convert;
};

double same(double x, const Context&) { return x; }
double from_hz(double x, const Context& c) { return hz_to_solver_units(x, c.p.omega_b_si); }

const std::map<std::string, KeyInfo, std::less<>>& key_table() {
  static const std::map<std::string, KeyInfo, std::less<>> table = {
      {"omega_b_over_2pi_hz", {Group::omega_b, [](double x, const Context&) { return kTwoPi * x; }}},
      {"omega_b_rad_per_s", {Group::omega_b, same}},
      {"kappa_a_over_omega_b", {Group::kappa_a, same}},
      {"kappa_a_over_2pi_hz", {Group::kappa_a, from_hz}},
      {"kappa_b_over_omega_b", {Group::kappa_b, same}},
      {"kappa_b_over_2pi_hz", {Group::kappa_b, from_hz}},
      {"delta_a_over_omega_b", {Group::delta_a, same}},
      {"delta_a_over_2pi_hz", {Group::delta_a, from_hz}},
      {"delta_c_over_omega_b", {Group::delta_c, same}},
      {"delta_c_over_2pi_hz", {Group::delta_c, from_hz}},
      {"omega_m_over_omega_b", {Group::omega_m, same}},
      {"omega_m_over_2pi_hz", {Group::omega_m, from_hz}},
      {"omega_m_over_delta_c", {Group::omega_m, [](double x, const Context& c) { return x * c.p.delta_c; }}},
      {"g_over_omega_b", {Group::g, same}},
      {"g_over_2pi_hz", {Group::g, from_hz}},
      {"G_c_over_omega_b", {Group::G_c, same}},
      {"G_m_over_omega_b", {Group::G_m, same}},
      {"G_m_over_G_c", {Group::G_m, [](double x, const Context& c) { return x * c.p.G_c; }}},
      {"theta_c_rad", {Group::theta_c, same}},
      {"theta_m_rad", {Group::theta_m, same}},
      {"E_over_omega_b", {Group::drive, same}},
      {"E_over_2pi_hz", {Group::drive, from_hz}},
      {"laser_power_w",
       {Group::drive,
        [](double x, const Context& c) {
          return drive_amplitude_from_power(x, c.wavelength_m, to_si(c.p.kappa_a, c.p.omega_b_si),
                                            c.p.omega_b_si);
        }}},
      {"laser_wavelength_m", {Group::wavelength, same}},
      {"r_b", {Group::r_b, same}},
      {"theta_rad", {Group::theta, same}},
      {"temperature_k", {Group::thermal, same}},
      {"n_b", {Group::thermal, same}},
      {"n_a", {Group::n_a, same}},
      {"literal_omega_m_entry", {Group::literal_omega_m_entry, same}},
      {"opa_phase_uses_delta_a", {Group::opa_phase_uses_delta_a, same}},
  };
  return table;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const ConfigEntry& e) {
  if (e.value == "true") return 1.0;
  if (e.value == "false") return 0.0;
  double x = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  auto [ptr, ec] = std::from_chars(first, last, x);
  if (ec != std::errc{} || ptr != last || !std::isfinite(x)) {
    throw SpecError(e.origin + ": '" + e.value + "' is not a finite number for " + e.key);
  }
  return x;
}

const KeyInfo& lookup(const ConfigEntry& e) {
  const auto& table = key_table();
  const auto it = table.find(e.key);
  if (it == table.end()) throw SpecError(e.origin + ": unknown key '" + e.key + "'");
  return it->second;
}

ConfigEntry split_assignment(std::string_view text, const std::string& origin) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw SpecError(origin + ": expected key = value, got '" + std::string(text) + "'");
  }
  ConfigEntry e{std::string(trim(text.substr(0, eq))), std::string(trim(text.substr(eq + 1))), origin};
  if (e.key.empty() || e.value.empty()) throw SpecError(origin + ": empty key or value");
  lookup(e);
  return e;
}

bool agree(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

std::string describe(const ConfigEntry& e) { return e.key + " = " + e.value + " (" + e.origin + ")"; }

double inverse_thermal_occupation(double n, double omega_si) {
  if (n == 0.0) return 0.0;
  return codata::hbar * omega_si / (codata::k_boltzmann * std::log1p(1.0 / n));
}

// Single solver-unit value for a group whose entries must coincide.
double consistent_value(const std::vector<ConfigEntry>& entries, const Context& ctx, double rel) {
  const double first = lookup(entries.front()).convert(parse_number(entries.front()), ctx);
  for (std::size_t k = 1; k < entries.size(); ++k) {
    const double v = lookup(entries[k]).convert(parse_number(entries[k]), ctx);
    if (!agree(first, v, rel)) {
      throw SpecError("conflicting values: " + describe(entries.front()) + " vs " +
                      describe(entries[k]));
    }
  }
  return first;
}

void resolve_drive(const std::vector<ConfigEntry>& entries, Context& ctx) {
  std::vector<ConfigEntry> amplitude, power;
  for (const auto& e : entries) (e.key == "laser_power_w" ? power : amplitude).push_back(e);
  std::optional<double> e_val, p_val;
  if (!amplitude.empty()) e_val = consistent_value(amplitude, ctx, 1e-9);
  if (!power.empty()) p_val = consistent_value(power, ctx, 1e-9);
  if (e_val && p_val && !agree(*e_val, *p_val, 0.02)) {
    throw SpecError("drive amplitude and laser power disagree by more than 2%: " +
                    describe(amplitude.front()) + " vs " + describe(power.front()));
  }
  ctx.p.E = e_val ? *e_val : *p_val;
}

void resolve_thermal(const std::vector<ConfigEntry>& entries, Context& ctx) {
  std::vector<ConfigEntry> temp, occ;
  for (const auto& e : entries) (e.key == "temperature_k" ? temp : occ).push_back(e);
  SystemParams& p = ctx.p;
  if (!temp.empty()) {
    p.temperature_k = consistent_value(temp, ctx, 1e-12);
    if (p.temperature_k < 0.0) throw SpecError("temperature_k must be >= 0");
    refresh_thermal_occupation(p);
  }
  if (!occ.empty()) {
    const double n = consistent_value(occ, ctx, 1e-12);
    if (n < 0.0) throw SpecError("n_b must be >= 0");
    if (!temp.empty() && !agree(n, p.n_b, 1e-6) && std::abs(n - p.n_b) > 1e-9) {
      throw SpecError("n_b = " + occ.front().value + " is inconsistent with temperature_k = " +
                      temp.front().value + " (Bose-Einstein gives " + std::to_string(p.n_b) + ")");
    }
    p.n_b = n;
    if (temp.empty()) p.temperature_k = inverse_thermal_occupation(n, p.omega_b_si);
  }
}

void apply(Group g, const std::vector<ConfigEntry>& entries, Context& ctx) {
  SystemParams& p = ctx.p;
  if (g == Group::drive) return resolve_drive(entries, ctx);
  if (g == Group::thermal) return resolve_thermal(entries, ctx);
  const double v = consistent_value(entries, ctx, 1e-9);
  switch (g) {
    case Group::omega_b: p.omega_b_si = v; break;
    case Group::kappa_a: p.kappa_a = v; break;
    case Group::kappa_b: p.kappa_b = v; break;
    case Group::delta_a: p.delta_a = v; break;
    case Group::delta_c: p.delta_c = v; break;
    case Group::omega_m: p.omega_m = v; break;
    case Group::g: p.g = v; break;
    case Group::G_c: p.G_c = v; break;
    case Group::G_m: p.G_m = v; break;
    case Group::theta_c: p.theta_c = v; break;
    case Group::theta_m: p.theta_m = v; break;
    case Group::wavelength: ctx.wavelength_m = v; break;
    case Group::r_b: p.r_b = v; break;
    case Group::theta: p.theta = v; break;
    case Group::n_a: p.n_a = v; break;
    case Group::literal_omega_m_entry: p.variant.literal_omega_m_entry = v != 0.0; break;
    case Group::opa_phase_uses_delta_a: p.variant.opa_phase_uses_delta_a = v != 0.0; break;
    case Group::drive:
    case Group::thermal: break;
  }
}

}  // namespace

ParamConfig parse_config(std::istream& in, const std::string& origin) {
  ParamConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    cfg.file_entries.push_back(split_assignment(text, origin + ":" + std::to_string(lineno)));
  }
  return cfg;
}

ParamConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open parameter file " + path.string());
  return parse_config(in, path.string());
}

void add_override(ParamConfig& cfg, std::string_view assignment) {
  cfg.overrides.push_back(split_assignment(trim(assignment), "--set"));
}

SystemParams resolve(const ParamConfig& cfg, const SystemParams& base) {
  std::map<Group, std::vector<ConfigEntry>> groups;
  for (const auto& e : cfg.file_entries) groups[lookup(e).group].push_back(e);
  for (const auto& e : cfg.overrides) groups[lookup(e).group] = {e};

  Context ctx{base, cfg.laser_wavelength_m};
  for (Group g : kOrder) {
    const auto it = groups.find(g);
    if (it != groups.end()) {
      apply(g, it->second, ctx);
    } else if (g == Group::thermal) {
      // omega_b may have moved; keep N_b tied to T.
      refresh_thermal_occupation(ctx.p);
    }
  }
  try {
    validate(ctx.p);
  } catch (const DomainError& e) {
    throw SpecError(std::string("resolved parameters are invalid: ") + e.what());
  }
  return ctx.p;
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : key_table()) keys.push_back(k);
  return keys;
}

void write_config(std::ostream& out, const SystemParams& p) {
  auto line = [&out](const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << key << " = " << buf << '\n';
  };
  line("omega_b_rad_per_s", p.omega_b_si);
  line("kappa_a_over_omega_b", p.kappa_a);
  line("kappa_b_over_omega_b", p.kappa_b);
  line("delta_a_over_omega_b", p.delta_a);
  line("delta_c_over_omega_b", p.delta_c);
  line("omega_m_over_omega_b", p.omega_m);
  line("g_over_omega_b", p.g);
  line("G_c_over_omega_b", p.G_c);
  line("G_m_over_omega_b", p.G_m);
  line("theta_c_rad", p.theta_c);
  line("theta_m_rad", p.theta_m);
  line("E_over_omega_b", p.E);
  line("r_b", p.r_b);
  line("theta_rad", p.theta);
  line("temperature_k", p.temperature_k);
  line("n_b", p.n_b);
  line("n_a", p.n_a);
  out << "literal_omega_m_entry = " << (p.variant.literal_omega_m_entry ? "true" : "false") << '\n';
  out << "opa_phase_uses_delta_a = " << (p.variant.opa_phase_uses_delta_a ? "true" : "false") << '\n';
}

std::string canonical_config(const SystemParams& p) {
  std::ostringstream s;
  write_config(s, p);
  return s.str();
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string params_hash(const SystemParams& p) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_config(p))));
  return buf;
}

}  // namespace fbcom
