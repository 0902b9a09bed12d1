#include "fbcom/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fbcom/config.hpp"
#include "fbcom/errors.hpp"
#include "fbcom/io.hpp"
#include "fbcom/limit_cycle.hpp"
#include "fbcom/pipeline.hpp"
#include "fbcom/sweep.hpp"

namespace fbcom::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string params_file;
  std::vector<std::string> sets;
  std::string out;
  double tol = 0.0;
  double budget_secs = 0.0;
  int workers = 0;
  std::string grid;
  std::string measures;
  bool alternate_initial = false;
  bool block_determinant = false;
  bool resume = false;
  long stop_after = -1;
};

void add_params_options(CLI::App& cmd, Common& c) {
  cmd.add_option("--params", c.params_file, "Parameter file (key = value per line)");
  cmd.add_option("--set", c.sets, "Override key=value, applied after --params in order")
      ->allow_extra_args(false);
  cmd.add_option("--out", c.out,
                 std::string("Output directory (default $") + kOutRootEnv + "/<name> or runs/<name>)");
  cmd.add_option("--tol", c.tol, "Integrator relative tolerance (absolute = 1e-3 x relative)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--budget-secs", c.budget_secs, "Wall-clock budget per integration (s)")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--alternate-initial", c.alternate_initial,
               "Start from the static-drive amplitude with vacuum fluctuations");
  cmd.add_flag("--block-determinant", c.block_determinant,
               "Diagnostics: use det of the 2x2 correlation block in the measures");
}

void add_sweep_options(CLI::App& cmd, Common& c) {
  cmd.add_option("--workers", c.workers, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--grid", c.grid, "Grid resolution n1[xn2]");
  cmd.add_option("--measures", c.measures, "Comma-separated measures: E_N,G_ab,G_ba,S_b,mu_b");
  cmd.add_flag("--resume", c.resume, "Reuse finished cells from the checkpoint in the output directory");
  cmd.add_option("--stop-after", c.stop_after, "Stop after this many new cells (leaves a checkpoint)");
}

SystemParams load_params(const Common& c, const SystemParams& base, ParamConfig& cfg,
                         std::ostream& err) {
  cfg = c.params_file.empty() ? ParamConfig{} : load_config_file(c.params_file);
  for (const auto& s : c.sets) {
    add_override(cfg, s);
    err << "override " << cfg.overrides.back().key << " = " << cfg.overrides.back().value << '\n';
  }
  return resolve(cfg, base);
}

PipelineSettings settings_from(const Common& c) {
  PipelineSettings s;
  if (c.tol > 0.0) {
    s.cycle.integrator.rtol = c.tol;
    s.cycle.integrator.atol = 1e-3 * c.tol;
  }
  if (c.budget_secs > 0.0) s.cycle.wall_budget_s = c.budget_secs;
  if (c.alternate_initial) s.cycle.integrator.initial = InitialCondition::alternate;
  if (c.block_determinant) s.reading = DeterminantReading::correlation_block;
  return s;
}

fs::path out_dir(const Common& c, const std::string& name) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv(kOutRootEnv);
  return fs::path(root && *root ? root : "runs") / name;
}

std::pair<int, int> parse_grid(const std::string& text) {
  if (text.empty()) return {0, 0};
  int n1 = 0, n2 = 0;
  char x = 0;
  std::istringstream s(text);
  s >> n1;
  if (s >> x) {
    if (x != 'x' || !(s >> n2)) throw SpecError("--grid expects n1 or n1xn2, got '" + text + "'");
  }
  if (n1 < 1 || (x && n2 < 1)) throw SpecError("--grid sizes must be positive");
  return {n1, n2};
}

double parse_double(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') throw SpecError("bad number '" + text + "' in " + what);
  return v;
}

// "path=start:stop:n" or "path=v1,v2,...".
SweepAxis parse_axis(const std::string& text, int n_override) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw SpecError("axis must look like path=start:stop:n, got '" + text + "'");
  SweepAxis axis{text.substr(0, eq), {}};
  (void)parse_parameter_path(axis.path);
  const std::string rest = text.substr(eq + 1);
  if (rest.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::istringstream s(rest);
    for (std::string p; std::getline(s, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw SpecError("axis range must be start:stop:n, got '" + rest + "'");
    const int n = n_override > 0 ? n_override : static_cast<int>(parse_double(parts[2], text));
    axis.values = linspace(parse_double(parts[0], text), parse_double(parts[1], text), n);
  } else {
    std::istringstream s(rest);
    for (std::string p; std::getline(s, p, ',');) axis.values.push_back(parse_double(p, text));
  }
  return axis;
}

std::vector<Measure> parse_measures(const std::string& text) {
  std::vector<Measure> out;
  std::istringstream s(text);
  for (std::string m; std::getline(s, m, ',');) out.push_back(measure_from_string(m));
  return out;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::ok: return kSuccess;
    case Verdict::unstable: return kUnstable;
    case Verdict::not_converged: return kNotConverged;
    case Verdict::quasi_periodic: return kQuasiPeriodic;
  }
  return kInternalError;
}

RunInfo run_info(const std::string& command, const Common& c, const ParamConfig& cfg) {
  return RunInfo{command, c.params_file, cfg.overrides, utc_timestamp()};
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw SpecError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void print_counts(const SweepResult& r, std::ostream& out) {
  std::map<std::string, int> counts;
  for (const auto& res : r.results) ++counts[std::string(to_string(res->verdict))];
  out << "cells " << r.cells.size();
  for (const auto& [k, v] : counts) out << "  " << k << '=' << v;
  out << "  wall " << r.wall_s << " s\n";
}

int run_and_write(SweepSpec spec, const Common& c, const RunInfo& info, const fs::path& dir,
                  std::ostream& out) {
  validate_spec(spec);
  fs::create_directories(dir);
  SweepOptions opt;
  opt.workers = c.workers;
  opt.checkpoint = dir / "checkpoint.log";
  opt.resume = c.resume;
  opt.stop_after = c.stop_after;
  const SweepResult r = run_sweep(spec, opt);
  if (!r.complete()) {
    out << "stopped early; rerun with --resume to finish " << dir.string() << '\n';
    return kSuccess;
  }
  write_sweep_artifacts(r, info, dir);
  print_counts(r, out);
  out << "artifacts in " << dir.string() << '\n';
  return kSuccess;
}

int cmd_simulate(const Common& c, double t_end, double stride, std::ostream& out,
                 std::ostream& err) {
  ParamConfig cfg;
  const SystemParams p = load_params(c, default_params(), cfg, err);
  const PipelineSettings settings = settings_from(c);
  const fs::path dir = out_dir(c, "simulate");

  const PointRun run = run_point(p, settings);
  fs::create_directories(dir);
  if (run.cycle) {
    std::ofstream f(dir / "cycle.csv", std::ios::binary | std::ios::trunc);
    write_cycle_csv(f, *run.cycle, run.records, p);
  }
  const double tau = modulation_period(p, settings.cycle.rational_tol,
                                       settings.cycle.max_denominator).tau;
  if (t_end <= 0.0 && run.cycle) t_end = run.cycle->settle_time + run.cycle->tau;
  if (stride <= 0.0) stride = tau / 64.0;
  std::string trajectory_note = "not written";
  if (t_end > 0.0) {
    try {
      const Trajectory traj = integrate(p, t_end, stride, settings.cycle.integrator);
      std::ofstream f(dir / "trajectory.csv", std::ios::binary | std::ios::trunc);
      write_trajectory_csv(f, traj, p, settings.cycle.integrator);
      trajectory_note = "trajectory.csv";
    } catch (const Error& e) {
      trajectory_note = std::string("integration failed: ") + e.what();
    }
  }

  Json manifest{{"schema_version", kSchemaVersion},
                {"generator", {{"name", "fbcom"}, {"version", version()}}},
                {"created_utc", utc_timestamp()},
                {"run", run_info_json(run_info("simulate", c, cfg))},
                {"params", params_json(p)},
                {"settings", settings_json(settings)},
                {"result", cell_json(run.result)},
                {"files",
                 {{"cycle", run.cycle ? "cycle.csv" : ""},
                  {"trajectory", trajectory_note},
                  {"trajectory_t_end", t_end},
                  {"trajectory_stride", stride}}}};
  write_json(dir / "manifest.json", manifest);

  const CellResult& r = run.result;
  out << "verdict " << to_string(r.verdict);
  if (!r.message.empty()) out << " (" << r.message << ")";
  out << '\n';
  if (r.verdict == Verdict::ok) {
    const auto& m = r.maxima;
    out << "tau " << r.diagnostics.tau << "  residual " << r.diagnostics.poincare_residual << '\n'
        << "E_N,max " << m.E_N.value << "  G_ab,max " << m.G_ab.value << "  G_ba,max "
        << m.G_ba.value << "  S_b,max " << m.S_b.value << " dB  mu_b,max " << m.mu_b.value << '\n'
        << "C_LC " << r.diagnostics.cooperativity << "  power balance residual "
        << r.diagnostics.power_balance_residual << '\n';
  }
  out << "artifacts in " << dir.string() << '\n';
  return exit_code(r.verdict);
}

int cmd_sweep(const Common& c, const std::string& a1, const std::string& a2, std::ostream& out,
              std::ostream& err) {
  ParamConfig cfg;
  SweepSpec spec;
  spec.base = load_params(c, default_params(), cfg, err);
  const auto [n1, n2] = parse_grid(c.grid);
  spec.axis1 = parse_axis(a1, n1);
  if (!a2.empty()) spec.axis2 = parse_axis(a2, n2);
  if (!c.measures.empty()) spec.outputs = parse_measures(c.measures);
  spec.pipeline = settings_from(c);
  return run_and_write(spec, c, run_info("sweep", c, cfg), out_dir(c, "sweep"), out);
}

int cmd_figure(const Common& c, const std::string& name, std::ostream& out, std::ostream& err) {
  const auto [n1, n2] = parse_grid(c.grid);
  SweepSpec spec = figure_preset(name, n1, n2);
  ParamConfig cfg;
  spec.base = load_params(c, spec.base, cfg, err);
  if (!c.measures.empty()) spec.outputs = parse_measures(c.measures);
  spec.pipeline = settings_from(c);
  const fs::path dir = out_dir(c, name);
  const int rc = run_and_write(spec, c, run_info("figure " + name, c, cfg), dir, out);
  if (rc != kSuccess || !fs::exists(dir / "manifest.json")) return rc;

  const char* plotter = std::getenv(kPlotterEnv);
  if (plotter && *plotter) {
    const std::string cmd =
        std::string(plotter) + " --manifest \"" + (dir / "manifest.json").string() + "\"";
    if (std::system(cmd.c_str()) != 0) err << "plotter failed; data files are complete\n";
  } else {
    out << "data only (set " << kPlotterEnv << " to render)\n";
  }
  return rc;
}

int cmd_stability(const Common& c, const std::string& a1, const std::string& a2,
                  std::ostream& out, std::ostream& err) {
  if (!a1.empty()) {
    const int rc = cmd_sweep(c, a1, a2, out, err);
    out << "per-cell max_re_eig and dominant_phonon_re are in diagnostics.csv\n";
    return rc;
  }
  ParamConfig cfg;
  const SystemParams p = load_params(c, default_params(), cfg, err);
  const CellResult r = evaluate_point(p, settings_from(c));
  const auto& d = r.diagnostics;
  out << "verdict " << to_string(r.verdict) << '\n'
      << "kappa_fb " << d.kappa_fb << '\n';
  // Eigenvalues are only known once a cycle exists.
  if (!std::isnan(d.max_re_eig)) {
    out << "max_re_eig " << d.max_re_eig << '\n'
        << "dominant_phonon_re " << d.dominant_phonon_re << '\n';
  }
  if (!std::isnan(d.growth_rate)) out << "growth_rate " << d.growth_rate << '\n';
  if (!r.message.empty()) out << "message " << r.message << '\n';
  return exit_code(r.verdict);
}

int cmd_validate(const Common& c, double delay_s, bool with_cycle, std::ostream& out,
                 std::ostream& err) {
  ParamConfig cfg;
  const SystemParams p = load_params(c, default_params(), cfg, err);
  const DerivedParams d = derive(p);
  const DelayValidity delay = delay_validity(to_si(p.kappa_a, p.omega_b_si), p.r_b, delay_s);

  Json report{{"kappa_fb", d.kappa_fb},
              {"delta_fb", d.delta_fb},
              {"t_b", d.t_b},
              {"temperature_k", p.temperature_k},
              {"n_b", p.n_b},
              {"delay_s", delay_s},
              {"delay_ratio", delay.ratio},
              {"delay_valid", delay.valid},
              {"gain_regime", !(d.kappa_fb > 0.0)}};
  out << "kappa_fb " << d.kappa_fb << (d.kappa_fb > 0.0 ? "" : "  FLAG: gain regime (kappa_fb <= 0)")
      << '\n'
      << "delta_fb " << d.delta_fb << '\n'
      << "t_b " << d.t_b << '\n'
      << "N_b " << p.n_b << " (T = " << p.temperature_k << " K)\n"
      << "delay ratio " << delay.ratio << " at t_d = " << delay_s << " s  "
      << (delay.valid ? "valid" : "FLAG: delay not negligible") << '\n';

  if (d.kappa_fb > 0.0) {
    // Static operating point of the undepleted drive.
    const cplx alpha0 = d.t_b * p.E / cplx(d.kappa_fb, d.delta_fb);
    const cplx beta0 = cplx(0.0, p.g * std::norm(alpha0)) / cplx(p.kappa_b, SystemParams::omega_b());
    const StabilityReport s = instantaneous_stability(p, {0.0, alpha0, beta0});
    out << "stability at t=0 (static operating point) " << (s.stable ? "stable" : "UNSTABLE")
        << "  max Re(lambda) " << s.max_re_eig << '\n';
    report["stable_at_t0"] = s.stable;
    report["max_re_eig_at_t0"] = s.max_re_eig;
  } else {
    out << "stability at t=0 UNSTABLE (photon block has positive real part)\n";
    report["stable_at_t0"] = false;
  }
  if (with_cycle) {
    const CellResult r = evaluate_point(p, settings_from(c));
    out << "cycle verdict " << to_string(r.verdict);
    if (r.verdict == Verdict::ok) out << "  C_LC " << r.diagnostics.cooperativity;
    out << '\n';
    report["cycle"] = cell_json(r);
  }
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    write_json(fs::path(c.out) / "validate.json",
               Json{{"schema_version", kSchemaVersion}, {"params", params_json(p)}, {"report", report}});
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherent-feedback optomechanics simulator: periodic steady states, Gaussian "
               "correlations and parameter sweeps"};
  app.name("fbcom");
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  app.footer(std::string("Environment: ") + kOutRootEnv + " sets the default output root; " +
             kPlotterEnv + " names a renderer run after `figure`.\n"
             "Exit codes: 0 ok, 2 spec error, 3 unstable, 4 not converged, 5 quasi-periodic.");

  Common c;
  double t_end = 0.0, stride = 0.0, delay_s = 1e-9;
  bool with_cycle = false;
  std::string axis1, axis2, preset;

  auto* simulate = app.add_subcommand("simulate", "Settle one parameter point and export its orbit");
  add_params_options(*simulate, c);
  simulate->add_option("--t-end", t_end, "Trajectory length (default: settle time + one period)");
  simulate->add_option("--stride", stride, "Trajectory sample spacing (default: period / 64)");

  auto* sweep = app.add_subcommand("sweep", "Run a 1D or 2D grid");
  add_params_options(*sweep, c);
  add_sweep_options(*sweep, c);
  std::string paths;
  for (const auto& n : parameter_path_names()) paths += (paths.empty() ? "" : ", ") + n;
  sweep->add_option("--axis1", axis1, "path=start:stop:n or path=v1,v2,...; paths: " + paths)
      ->required();
  sweep->add_option("--axis2", axis2, "Second axis, same syntax");

  auto* figure = app.add_subcommand("figure", "Run a figure preset");
  add_params_options(*figure, c);
  add_sweep_options(*figure, c);
  figure->add_option("name", preset, "Preset name")->required()->check(CLI::IsMember(preset_names()));

  auto* stability = app.add_subcommand("stability", "Stability verdicts at a point or along axes");
  add_params_options(*stability, c);
  add_sweep_options(*stability, c);
  stability->add_option("--axis1", axis1, "Optional axis, path=start:stop:n");
  stability->add_option("--axis2", axis2, "Second axis");

  auto* validate_cmd = app.add_subcommand("validate", "Closed-form checks of a parameter set");
  add_params_options(*validate_cmd, c);
  validate_cmd->add_option("--delay-s", delay_s, "Feedback loop delay in seconds");
  validate_cmd->add_flag("--with-cycle", with_cycle, "Also settle the cycle and report C_LC");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kSuccess : kSpecError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(c, t_end, stride, out, err);
    if (sweep->parsed()) return cmd_sweep(c, axis1, axis2, out, err);
    if (figure->parsed()) return cmd_figure(c, preset, out, err);
    if (stability->parsed()) return cmd_stability(c, axis1, axis2, out, err);
    if (validate_cmd->parsed()) return cmd_validate(c, delay_s, with_cycle, out, err);
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const DomainError& e) {
    err << "spec error: " << e.what() << '\n';
    return kSpecError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace fbcom::cli
