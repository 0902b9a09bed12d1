#include "fbcom/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "fbcom/errors.hpp"

#ifndef FBCOM_VERSION
#define FBCOM_VERSION "0.0.0"
#endif

namespace fbcom {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no NaN; absent values become null.
Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string header(const std::string& kind, const SweepResult& r, const std::string& extra = "") {
  std::string h = "# fbcom schema_version=" + std::to_string(kSchemaVersion) + " kind=" + kind +
                  " preset=" + r.spec.name + " axis1=" + r.spec.axis1.path;
  if (r.spec.axis2) h += " axis2=" + r.spec.axis2->path;
  return h + extra + "\n";
}

std::string axis2_text(const SweepCell& c) { return std::isnan(c.x2) ? "" : num(c.x2); }

const CellResult& result_at(const SweepResult& r, std::size_t k) {
  if (!r.results[k]) throw DomainError("sweep result is incomplete");
  return *r.results[k];
}

Json axis_json(const SweepAxis& a) {
  const ParameterPath p = parse_parameter_path(a.path);
  return Json{{"path", p.name}, {"units", p.units}, {"values", a.values}};
}

}  // namespace

std::string version() { return FBCOM_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json params_json(const SystemParams& p) {
  return Json{
      {"omega_b_rad_per_s", p.omega_b_si},
      {"kappa_a", p.kappa_a},
      {"kappa_b", p.kappa_b},
      {"delta_a", p.delta_a},
      {"delta_c", p.delta_c},
      {"omega_m", p.omega_m},
      {"g", p.g},
      {"G_c", p.G_c},
      {"theta_c", p.theta_c},
      {"G_m", p.G_m},
      {"theta_m", p.theta_m},
      {"E", p.E},
      {"r_b", p.r_b},
      {"theta", p.theta},
      {"temperature_k", p.temperature_k},
      {"n_a", p.n_a},
      {"n_b", p.n_b},
      {"literal_omega_m_entry", p.variant.literal_omega_m_entry},
      {"opa_phase_uses_delta_a", p.variant.opa_phase_uses_delta_a},
      {"units", "rates in omega_b, phases in rad, temperature in K"},
      {"canonical_config", canonical_config(p)},
      {"hash", params_hash(p)},
  };
}

Json settings_json(const PipelineSettings& s) {
  const CycleSettings& c = s.cycle;
  return Json{
      {"integrator", "dormand-prince 5(4), rms error norm"},
      {"rtol", c.integrator.rtol},
      {"atol", c.integrator.atol},
      {"max_step", c.integrator.max_step},
      {"max_steps", c.integrator.max_steps},
      {"covariance_blowup", c.integrator.covariance_blowup},
      {"initial_condition",
       c.integrator.initial == InitialCondition::quiescent ? "quiescent" : "alternate"},
      {"samples_per_period", c.samples_per_period},
      {"residual_tolerance", c.residual_tolerance},
      {"transient_time", c.transient_time},
      {"max_time", c.max_time},
      {"wall_budget_s", c.wall_budget_s},
      {"rational_tol", c.rational_tol},
      {"max_denominator", c.max_denominator},
      {"determinant_reading",
       s.reading == DeterminantReading::full_matrix ? "full_matrix" : "correlation_block"},
  };
}

Json run_info_json(const RunInfo& info) {
  Json overrides = Json::array();
  for (const auto& o : info.overrides) {
    overrides.push_back({{"key", o.key}, {"value", o.value}, {"origin", o.origin}});
  }
  return Json{{"command", info.command},
              {"params_file", info.params_file},
              {"overrides", overrides}};
}

void write_measure_csv(std::ostream& out, const SweepResult& r, Measure m) {
  out << header("measure", r, " measure=" + std::string(to_string(m)));
  out << "axis1,axis2,value,verdict\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const SweepCell& c = r.cells[k];
    const CellResult& res = result_at(r, k);
    const double v = res.verdict == Verdict::ok ? measure_value(res.maxima, m) : NAN;
    out << num(c.x1) << ',' << axis2_text(c) << ',' << num(v) << ',' << to_string(res.verdict)
        << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, const SweepResult& r) {
  out << header("diagnostics", r);
  out << "index,i,j,axis1,axis2,verdict,snap_distance,kappa_fb,tau,settle_time,poincare_residual,"
         "cooperativity,power_balance_residual,max_re_eig,dominant_phonon_re,growth_rate,"
         "mean_abs_alpha,mean_photon_number,min_symplectic,"
         "E_N_max,E_N_t,G_ab_max,G_ab_t,G_ba_max,G_ba_t,S_b_max,S_b_t,mu_b_max,mu_b_t,"
         "E_N_raw,G_ab_raw,G_ba_raw,message\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const SweepCell& c = r.cells[k];
    const CellResult& res = result_at(r, k);
    const CellDiagnostics& d = res.diagnostics;
    const PeriodicMaxima& m = res.maxima;
    out << c.index << ',' << c.i << ',' << c.j << ',' << num(c.x1) << ',' << axis2_text(c) << ','
        << to_string(res.verdict);
    for (double x : {c.snap_distance, d.kappa_fb, d.tau, d.settle_time, d.poincare_residual,
                     d.cooperativity, d.power_balance_residual, d.max_re_eig, d.dominant_phonon_re,
                     d.growth_rate, d.mean_abs_alpha, d.mean_photon_number, m.min_symplectic,
                     m.E_N.value, m.E_N.t, m.G_ab.value, m.G_ab.t, m.G_ba.value, m.G_ba.t,
                     m.S_b.value, m.S_b.t, m.mu_b.value, m.mu_b.t, m.E_N_raw.value,
                     m.G_ab_raw.value, m.G_ba_raw.value}) {
      out << ',' << num(x);
    }
    out << ',' << quoted(res.message) << '\n';
  }
}

void write_contours_csv(std::ostream& out, const SweepResult& r) {
  out << header("contours", r, " level=0 source=raw_steering_maxima");
  out << "measure,polyline,vertex,axis1,axis2,closed\n";
  if (!r.spec.axis2) return;
  const std::size_t n = r.cells.size();
  for (Measure m : {Measure::G_ab, Measure::G_ba}) {
    std::vector<double> f(n);
    for (std::size_t k = 0; k < n; ++k) {
      const CellResult& res = result_at(r, k);
      const PeriodicMaxima& mx = res.maxima;
      f[k] = res.verdict != Verdict::ok ? NAN
             : m == Measure::G_ab       ? mx.G_ab_raw.value
                                        : mx.G_ba_raw.value;
    }
    const auto lines = contour_lines(r.spec.axis1.values, r.spec.axis2->values, f, 0.0);
    for (std::size_t l = 0; l < lines.size(); ++l) {
      for (std::size_t v = 0; v < lines[l].points.size(); ++v) {
        out << to_string(m) << ',' << l << ',' << v << ',' << num(lines[l].points[v].first) << ','
            << num(lines[l].points[v].second) << ',' << (lines[l].closed ? 1 : 0) << '\n';
      }
    }
  }
}

void write_timing_csv(std::ostream& out, const SweepResult& r) {
  out << "# fbcom schema_version=" << kSchemaVersion << " kind=timing workers=" << r.workers
      << " total_wall_s=" << num(r.wall_s) << '\n';
  out << "index,wall_s\n";
  for (std::size_t k = 0; k < r.cells.size(); ++k) out << k << ',' << num(r.cell_wall_s[k]) << '\n';
}

Json sweep_manifest(const SweepResult& r, const RunInfo& info) {
  std::map<std::string, int> counts;
  for (Verdict v : {Verdict::ok, Verdict::unstable, Verdict::not_converged, Verdict::quasi_periodic}) {
    counts[std::string(to_string(v))] = 0;
  }
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    ++counts[std::string(to_string(result_at(r, k).verdict))];
  }
  Json files = Json::object();
  Json measures = Json::array();
  for (Measure m : r.spec.outputs) {
    measures.push_back(to_string(m));
    files[std::string(to_string(m))] = std::string(to_string(m)) + ".csv";
  }
  files["diagnostics"] = "diagnostics.csv";
  files["contours"] = "contours.csv";
  files["timing"] = "timing.csv";
  Json grid{{"axis1", axis_json(r.spec.axis1)},
            {"axis2", r.spec.axis2 ? axis_json(*r.spec.axis2) : Json(nullptr)},
            {"cell_order", "index = i * n2 + j, i along axis1"},
            {"snap_max_denominator", r.spec.max_snap_denominator}};
  return Json{{"schema_version", kSchemaVersion},
              {"generator", {{"name", "fbcom"}, {"version", version()}}},
              {"created_utc", info.created_utc},
              {"run", run_info_json(info)},
              {"preset", r.spec.name},
              {"spec_fingerprint", spec_fingerprint(r.spec)},
              {"params", params_json(r.spec.base)},
              {"grid", grid},
              {"settings", settings_json(r.spec.pipeline)},
              {"measures", measures},
              {"files", files},
              {"verdict_counts", counts},
              {"unit_system", "time in 1/omega_b, rates in omega_b, variances with vacuum = 1/2, "
                              "squeezing in dB"}};
}

void write_sweep_artifacts(const SweepResult& r, const RunInfo& info,
                           const std::filesystem::path& dir) {
  if (!r.complete()) throw DomainError("refusing to write artifacts of an incomplete sweep");
  std::filesystem::create_directories(dir);
  auto open = [&dir](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    if (!f) throw SpecError("cannot write " + (dir / name).string());
    return f;
  };
  for (Measure m : r.spec.outputs) {
    auto f = open(std::string(to_string(m)) + ".csv");
    write_measure_csv(f, r, m);
  }
  {
    auto f = open("diagnostics.csv");
    write_diagnostics_csv(f, r);
  }
  {
    auto f = open("contours.csv");
    write_contours_csv(f, r);
  }
  {
    auto f = open("timing.csv");
    write_timing_csv(f, r);
  }
  auto f = open("manifest.json");
  f << sweep_manifest(r, info).dump(2) << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const SystemParams& p,
                          const IntegratorSettings& s) {
  out << "# fbcom schema_version=" << kSchemaVersion << " kind=trajectory params_hash="
      << params_hash(p) << '\n';
  out << "# units: time in 1/omega_b; alpha, beta dimensionless; V in quadrature units with "
         "vacuum = 1/2\n";
  out << "# integrator: dormand-prince 5(4) rtol=" << num(s.rtol) << " atol=" << num(s.atol)
      << " max_step=" << num(s.max_step) << '\n';
  out << "t,re_alpha,im_alpha,abs_alpha,re_beta,im_beta";
  for (int r = 1; r <= 4; ++r) {
    for (int c = r; c <= 4; ++c) out << ",V" << r << c;
  }
  out << '\n';
  for (const auto& smp : traj.samples) {
    const auto& y = smp.y;
    out << num(smp.t) << ',' << num(y[0]) << ',' << num(y[1]) << ',' << num(std::hypot(y[0], y[1]))
        << ',' << num(y[2]) << ',' << num(y[3]);
    for (int r = 0; r < 4; ++r) {
      for (int c = r; c < 4; ++c) out << ',' << num(y[4 + c * 4 + r]);
    }
    out << '\n';
  }
}

void write_cycle_csv(std::ostream& out, const LimitCycle& cycle,
                     const std::vector<CorrelationRecord>& records, const SystemParams& p) {
  out << "# fbcom schema_version=" << kSchemaVersion << " kind=cycle params_hash=" << params_hash(p)
      << " tau=" << num(cycle.tau) << " poincare_residual=" << num(cycle.poincare_residual) << '\n';
  out << "t,re_alpha,im_alpha,abs_alpha,re_beta,im_beta,E_N,G_ab,G_ba,S_b,mu_b,min_symplectic\n";
  for (std::size_t k = 0; k < cycle.orbit.size(); ++k) {
    const MeanFieldState& s = cycle.orbit[k];
    out << num(s.t) << ',' << num(s.alpha.real()) << ',' << num(s.alpha.imag()) << ','
        << num(std::abs(s.alpha)) << ',' << num(s.beta.real()) << ',' << num(s.beta.imag());
    if (k < records.size()) {
      const CorrelationRecord& r = records[k];
      for (double x : {r.E_N, r.G_ab, r.G_ba, r.S_b, r.mu_b, r.min_symplectic}) out << ',' << num(x);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

Json cell_json(const CellResult& r) {
  const PeriodicMaxima& m = r.maxima;
  const CellDiagnostics& d = r.diagnostics;
  auto mx = [](const MeasureMaximum& x) { return Json{{"value", jnum(x.value)}, {"t", jnum(x.t)}}; };
  return Json{
      {"verdict", to_string(r.verdict)},
      {"message", r.message},
      {"maxima",
       {{"E_N", mx(m.E_N)}, {"G_ab", mx(m.G_ab)}, {"G_ba", mx(m.G_ba)}, {"S_b", mx(m.S_b)},
        {"mu_b", mx(m.mu_b)}, {"E_N_raw", mx(m.E_N_raw)}, {"G_ab_raw", mx(m.G_ab_raw)},
        {"G_ba_raw", mx(m.G_ba_raw)}, {"min_symplectic", jnum(m.min_symplectic)}}},
      {"diagnostics",
       {{"kappa_fb", jnum(d.kappa_fb)}, {"tau", jnum(d.tau)}, {"settle_time", jnum(d.settle_time)},
        {"poincare_residual", jnum(d.poincare_residual)}, {"cooperativity", jnum(d.cooperativity)},
        {"power_balance_residual", jnum(d.power_balance_residual)},
        {"max_re_eig", jnum(d.max_re_eig)}, {"dominant_phonon_re", jnum(d.dominant_phonon_re)},
        {"growth_rate", jnum(d.growth_rate)}, {"mean_abs_alpha", jnum(d.mean_abs_alpha)},
        {"mean_photon_number", jnum(d.mean_photon_number)}}},
  };
}

void check_schema_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# fbcom ", 0) != 0) {
    throw SpecError("missing fbcom schema header");
  }
  const std::string tag = "schema_version=";
  const auto pos = line.find(tag);
  if (pos == std::string::npos) throw SpecError("missing schema_version");
  const int v = std::atoi(line.c_str() + pos + tag.size());
  if (v != kSchemaVersion) {
    throw SpecError("unsupported schema_version " + std::to_string(v) + " (expected " +
                    std::to_string(kSchemaVersion) + ")");
  }
}

}  // namespace fbcom
