#include "fbcom/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbcom/config.hpp"
#include "fbcom/errors.hpp"

namespace fbcom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PathInfo {
  const char* name;
  Quantity quantity;
  const char* units;
};

constexpr std::array<PathInfo, 17> kPaths{{
    {"r_b", Quantity::r_b, "1"},
    {"theta", Quantity::theta, "rad"},
    {"theta_c", Quantity::theta_c, "rad"},
    {"theta_m", Quantity::theta_m, "rad"},
    {"G_c", Quantity::G_c, "omega_b"},
    {"G_m", Quantity::G_m, "omega_b"},
    {"E", Quantity::E, "omega_b"},
    {"delta_a", Quantity::delta_a, "omega_b"},
    {"delta_c", Quantity::delta_c, "omega_b"},
    {"omega_m", Quantity::omega_m, "omega_b"},
    {"kappa_a", Quantity::kappa_a, "omega_b"},
    {"kappa_b", Quantity::kappa_b, "omega_b"},
    {"g", Quantity::g, "omega_b"},
    {"temperature_k", Quantity::temperature_k, "K"},
    {"n_a", Quantity::n_a, "1"},
    {"omega_m_over_delta_c", Quantity::omega_m_over_delta_c, "1"},
    {"G_m_over_G_c", Quantity::G_m_over_G_c, "1"},
}};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void snap_frequency_ratio(SweepCell& cell, int max_den) {
  SystemParams& p = cell.params;
  if (max_den <= 0 || p.delta_c == 0.0 || p.omega_m == 0.0) return;
  const double r = std::abs(p.omega_m / p.delta_c);
  if (!std::isfinite(r)) return;
  const Fraction f = best_rational(r, max_den);
  cell.snap_distance = std::abs(r - f.value());
  p.omega_m = std::copysign(f.value() * std::abs(p.delta_c), p.omega_m * p.delta_c);
}

// Every numeric field of a CellResult, in checkpoint order.
std::vector<double*> numeric_fields(CellResult& r) {
  PeriodicMaxima& m = r.maxima;
  CellDiagnostics& d = r.diagnostics;
  std::vector<double*> out;
  for (MeasureMaximum* x : {&m.E_N, &m.G_ab, &m.G_ba, &m.S_b, &m.mu_b, &m.E_N_raw, &m.G_ab_raw,
                            &m.G_ba_raw}) {
    out.push_back(&x->value);
    out.push_back(&x->t);
  }
  out.push_back(&m.min_symplectic);
  for (double* x : {&d.kappa_fb, &d.tau, &d.settle_time, &d.poincare_residual, &d.cooperativity,
                    &d.power_balance_residual, &d.max_re_eig, &d.dominant_phonon_re,
                    &d.growth_rate, &d.mean_abs_alpha, &d.mean_photon_number}) {
    out.push_back(x);
  }
  return out;
}

std::string sanitize(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return s;
}

std::string checkpoint_line(std::size_t index, CellResult r) {
  std::string line = "cell\t" + std::to_string(index) + "\t" + std::string(to_string(r.verdict));
  for (double* x : numeric_fields(r)) line += "\t" + fmt17(*x);
  line += "\t" + sanitize(r.message) + "\n";
  return line;
}

std::optional<std::pair<std::size_t, CellResult>> parse_checkpoint_line(const std::string& line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    parts.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  CellResult r;
  auto fields = numeric_fields(r);
  if (parts.size() != fields.size() + 4 || parts[0] != "cell") return std::nullopt;
  char* end = nullptr;
  const unsigned long long index = std::strtoull(parts[1].c_str(), &end, 10);
  if (*end != '\0') return std::nullopt;
  r.verdict = verdict_from_string(parts[2]);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    *fields[k] = std::strtod(parts[3 + k].c_str(), &end);
    if (*end != '\0') return std::nullopt;
  }
  r.message = parts.back();
  return std::make_pair(static_cast<std::size_t>(index), r);
}

class Checkpoint {
 public:
  Checkpoint(const SweepOptions& options, const std::string& fingerprint, SweepResult& result)
      : path_(options.checkpoint) {
    if (path_.empty()) return;
    const std::string header = "# fbcom-checkpoint schema_version=1 spec=" + fingerprint + "\n";
    if (options.resume && std::filesystem::exists(path_)) {
      load(header, result);
      out_.open(path_, std::ios::app | std::ios::binary);
    } else {
      out_.open(path_, std::ios::trunc | std::ios::binary);
      out_ << header;
      out_.flush();
    }
    if (!out_) throw SpecError("cannot write checkpoint " + path_.string());
  }

  void append(std::size_t index, const CellResult& r) {
    if (path_.empty()) return;
    out_ << checkpoint_line(index, r);
    out_.flush();
  }

 private:
  void load(const std::string& header, SweepResult& result) {
    std::string text;
    {
      std::ifstream in(path_, std::ios::binary);
      std::ostringstream s;
      s << in.rdbuf();
      text = s.str();
    }
    if (text.rfind(header, 0) != 0) {
      throw SpecError("checkpoint " + path_.string() + " belongs to a different sweep");
    }
    // A run killed mid-write leaves a partial last line; drop it.
    const std::size_t keep = text.find_last_of('\n') + 1;
    if (keep < text.size()) {
      text.resize(keep);
      std::filesystem::resize_file(path_, keep);
    }
    std::istringstream lines(text.substr(header.size()));
    std::string line;
    while (std::getline(lines, line)) {
      auto parsed = parse_checkpoint_line(line);
      if (!parsed || parsed->first >= result.results.size()) {
        throw SpecError("corrupt checkpoint line in " + path_.string());
      }
      result.results[parsed->first] = parsed->second;
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

SweepResult run_impl(const SweepSpec& spec, const SweepOptions& options, bool parallel) {
  validate_spec(spec);
  const auto started = std::chrono::steady_clock::now();
  SweepResult res;
  res.spec = spec;
  res.cells = expand_cells(spec);
  res.results.assign(res.cells.size(), std::nullopt);
  res.cell_wall_s.assign(res.cells.size(), kNaN);

  Checkpoint checkpoint(options, spec_fingerprint(spec), res);
  std::vector<std::size_t> pending;
  for (std::size_t k = 0; k < res.cells.size(); ++k) {
    if (!res.results[k]) pending.push_back(k);
  }

  long finished = 0;
  bool stopped = options.stop_after == 0;
  auto run_cell = [&](std::size_t idx) {
    const auto t0 = std::chrono::steady_clock::now();
    CellResult r = evaluate_point(res.cells[idx].params, spec.pipeline);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return std::make_pair(r, dt.count());
  };
  auto record = [&](std::size_t idx, CellResult r, double wall) {
    if (stopped) return;
    res.results[idx] = std::move(r);
    res.cell_wall_s[idx] = wall;
    checkpoint.append(idx, *res.results[idx]);
    if (options.stop_after > 0 && ++finished >= options.stop_after) {
#pragma omp atomic write
      stopped = true;
    }
  };

  const auto n = static_cast<long>(pending.size());
  std::exception_ptr failure;
  if (parallel) {
    const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
    res.workers = workers;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long k = 0; k < n; ++k) {
      bool skip = false;
#pragma omp atomic read
      skip = stopped;
      if (skip) continue;
      try {
        auto [r, wall] = run_cell(pending[static_cast<std::size_t>(k)]);
#pragma omp critical(fbcom_sweep_writer)
        record(pending[static_cast<std::size_t>(k)], std::move(r), wall);
      } catch (...) {
#pragma omp critical(fbcom_sweep_writer)
        {
          if (!failure) failure = std::current_exception();
#pragma omp atomic write
          stopped = true;
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    res.workers = 1;
    for (long k = 0; k < n && !stopped; ++k) {
      auto [r, wall] = run_cell(pending[static_cast<std::size_t>(k)]);
      record(pending[static_cast<std::size_t>(k)], std::move(r), wall);
    }
  }
  const std::chrono::duration<double> total = std::chrono::steady_clock::now() - started;
  res.wall_s = total.count();
  return res;
}

}  // namespace

ParameterPath parse_parameter_path(std::string_view name) {
  std::string key(name);
  if (key == "omega_m/delta_c") key = "omega_m_over_delta_c";
  if (key == "G_m/G_c") key = "G_m_over_G_c";
  if (key == "T") key = "temperature_k";
  for (const auto& info : kPaths) {
    if (key == info.name) return {info.quantity, info.name, info.units};
  }
  throw SpecError("unknown parameter path '" + std::string(name) + "'");
}

std::vector<std::string> parameter_path_names() {
  std::vector<std::string> out;
  for (const auto& info : kPaths) out.emplace_back(info.name);
  return out;
}

void apply_path(SystemParams& p, const ParameterPath& path, double v) {
  switch (path.quantity) {
    case Quantity::r_b: p.r_b = v; break;
    case Quantity::theta: p.theta = v; break;
    case Quantity::theta_c: p.theta_c = v; break;
    case Quantity::theta_m: p.theta_m = v; break;
    case Quantity::G_c: p.G_c = v; break;
    case Quantity::G_m: p.G_m = v; break;
    case Quantity::E: p.E = v; break;
    case Quantity::delta_a: p.delta_a = v; break;
    case Quantity::delta_c: p.delta_c = v; break;
    case Quantity::omega_m: p.omega_m = v; break;
    case Quantity::kappa_a: p.kappa_a = v; break;
    case Quantity::kappa_b: p.kappa_b = v; break;
    case Quantity::g: p.g = v; break;
    case Quantity::temperature_k:
      p.temperature_k = v;
      refresh_thermal_occupation(p);
      break;
    case Quantity::n_a: p.n_a = v; break;
    case Quantity::omega_m_over_delta_c: p.omega_m = v * p.delta_c; break;
    case Quantity::G_m_over_G_c: p.G_m = v * p.G_c; break;
  }
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::E_N: return "E_N";
    case Measure::G_ab: return "G_ab";
    case Measure::G_ba: return "G_ba";
    case Measure::S_b: return "S_b";
    case Measure::mu_b: return "mu_b";
  }
  return "?";
}

Measure measure_from_string(std::string_view name) {
  for (Measure m : {Measure::E_N, Measure::G_ab, Measure::G_ba, Measure::S_b, Measure::mu_b}) {
    if (to_string(m) == name) return m;
  }
  throw SpecError("unknown measure '" + std::string(name) + "'");
}

double measure_value(const PeriodicMaxima& m, Measure which) {
  switch (which) {
    case Measure::E_N: return m.E_N.value;
    case Measure::G_ab: return m.G_ab.value;
    case Measure::G_ba: return m.G_ba.value;
    case Measure::S_b: return m.S_b.value;
    case Measure::mu_b: return m.mu_b.value;
  }
  return kNaN;
}

std::vector<double> linspace(double first, double last, int n) {
  if (n < 1) throw SpecError("an axis needs at least one point");
  if (n == 1) return {first};
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    v[static_cast<std::size_t>(k)] = first + (last - first) * k / (n - 1);
  }
  v.back() = last;
  return v;
}

void validate_spec(const SweepSpec& spec) {
  auto check_axis = [](const SweepAxis& axis) {
    (void)parse_parameter_path(axis.path);
    if (axis.values.empty()) throw SpecError("axis " + axis.path + " has no values");
    for (double v : axis.values) {
      if (!std::isfinite(v)) throw SpecError("axis " + axis.path + " has a non-finite value");
    }
    if (axis.values.size() > 1) {
      const bool up = axis.values[1] > axis.values[0];
      for (std::size_t k = 1; k < axis.values.size(); ++k) {
        const bool step_up = axis.values[k] > axis.values[k - 1];
        if (axis.values[k] == axis.values[k - 1] || step_up != up) {
          throw SpecError("axis " + axis.path + " is not strictly monotone");
        }
      }
    }
  };
  check_axis(spec.axis1);
  if (spec.axis2) {
    check_axis(*spec.axis2);
    if (parse_parameter_path(spec.axis1.path).quantity ==
        parse_parameter_path(spec.axis2->path).quantity) {
      throw SpecError("both axes drive " + spec.axis1.path);
    }
  }
  if (spec.outputs.empty()) throw SpecError("no output measures requested");
  try {
    validate(spec.base);
  } catch (const DomainError& e) {
    throw SpecError(std::string("base parameters invalid: ") + e.what());
  }
  for (const SweepCell& c : expand_cells(spec)) {
    try {
      validate(c.params);
    } catch (const DomainError& e) {
      throw SpecError("cell (" + fmt17(c.x1) + ", " + fmt17(c.x2) + "): " + e.what());
    }
  }
}

std::string spec_fingerprint(const SweepSpec& spec) {
  std::ostringstream s;
  s << canonical_config(spec.base);
  auto axis = [&s](const char* tag, const SweepAxis& a) {
    s << tag << '=' << a.path << ':';
    for (double v : a.values) s << fmt17(v) << ',';
    s << '\n';
  };
  axis("axis1", spec.axis1);
  if (spec.axis2) axis("axis2", *spec.axis2);
  const CycleSettings& c = spec.pipeline.cycle;
  s << "rtol=" << fmt17(c.integrator.rtol) << " atol=" << fmt17(c.integrator.atol)
    << " max_step=" << fmt17(c.integrator.max_step) << " max_steps=" << c.integrator.max_steps
    << " blowup=" << fmt17(c.integrator.covariance_blowup)
    << " initial=" << static_cast<int>(c.integrator.initial) << " samples=" << c.samples_per_period
    << " residual=" << fmt17(c.residual_tolerance) << " transient=" << fmt17(c.transient_time)
    << " max_time=" << fmt17(c.max_time) << " rational_tol=" << fmt17(c.rational_tol)
    << " max_den=" << c.max_denominator << " snap=" << spec.max_snap_denominator
    << " reading=" << static_cast<int>(spec.pipeline.reading) << '\n';
  // The wall budget and output list do not change cell values.
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(s.str())));
  return buf;
}

std::vector<SweepCell> expand_cells(const SweepSpec& spec) {
  const ParameterPath p1 = parse_parameter_path(spec.axis1.path);
  const std::optional<ParameterPath> p2 =
      spec.axis2 ? std::optional(parse_parameter_path(spec.axis2->path)) : std::nullopt;
  const std::size_t n1 = spec.axis1.values.size();
  const std::size_t n2 = spec.axis2 ? spec.axis2->values.size() : 1;
  std::vector<SweepCell> cells;
  cells.reserve(n1 * n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      SweepCell c;
      c.index = i * n2 + j;
      c.i = i;
      c.j = j;
      c.x1 = spec.axis1.values[i];
      c.x2 = p2 ? spec.axis2->values[j] : kNaN;
      c.params = spec.base;
      // Absolute quantities first so ratio axes scale the final denominators.
      for (bool ratio_pass : {false, true}) {
        if (p1.is_ratio() == ratio_pass) apply_path(c.params, p1, c.x1);
        if (p2 && p2->is_ratio() == ratio_pass) apply_path(c.params, *p2, c.x2);
      }
      snap_frequency_ratio(c, spec.max_snap_denominator);
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

bool SweepResult::complete() const {
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.has_value(); });
}

SweepResult run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  return run_impl(spec, options, true);
}

SweepResult run_sweep_serial(const SweepSpec& spec, const SweepOptions& options) {
  return run_impl(spec, options, false);
}

}  // namespace fbcom
