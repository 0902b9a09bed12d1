// Acceptance runner: one line per criterion.
//
//   fbcom_acceptance            run everything
//   fbcom_acceptance <id>...    run the named criteria
//   fbcom_acceptance --list     print the ids
//
// Exit status is 0 only if every requested criterion passes.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fbcom/io.hpp"
#include "fbcom/limit_cycle.hpp"
#include "fbcom/measures.hpp"
#include "fbcom/ode.hpp"
#include "fbcom/pipeline.hpp"
#include "fbcom/sweep.hpp"
#include "oracles.hpp"

#ifndef FBCOM_BINARY
#error "FBCOM_BINARY must name the fbcom executable"
#endif

using namespace fbcom;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kIdentityTol = 1e-12;
constexpr double kTmsvTol = 1e-9;
constexpr double kLyapunovTol = 1e-6;
constexpr double kDriftTol = 1e-12;
constexpr double kPowerBalanceTol = 1e-4;
constexpr double kScalingTol = 0.10;
constexpr double kFig3bTarget = 0.52;
constexpr double kFig3bRowTarget = 0.42;
constexpr double kFig3bTol = 0.08;
constexpr double kPoincareTol = 1e-5;
constexpr double kMaximaShiftTol = 1e-4;
constexpr double kSymplecticFloor = 0.5 - 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Sweeps shared by several criteria are computed once per process.
const SweepResult& preset_run(const std::string& name) {
  static std::map<std::string, SweepResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, run_sweep(figure_preset(name))).first;
  return it->second;
}

Outcome vacuum_identity() {
  const CorrelationRecord r = evaluate(CovarianceMatrix::vacuum(), 0.0);
  const double worst = std::max({std::abs(r.E_N), std::abs(r.G_ab), std::abs(r.G_ba),
                                 std::abs(r.S_b), std::abs(r.mu_b - 1.0)});
  return {worst <= kIdentityTol, fmt("max deviation %.3g", worst)};
}

Outcome tmsv_oracle() {
  double worst = 0.0;
  for (double r : {0.1, 0.5, 1.0}) {
    const CovarianceMatrix v = oracle::tmsv(r);
    const double g = std::log(std::cosh(2.0 * r));
    worst = std::max({worst, std::abs(log_negativity(v) - 2.0 * r),
                      std::abs(steering(v, Direction::a_to_b) - g),
                      std::abs(steering(v, Direction::b_to_a) - g)});
  }
  return {worst <= kTmsvTol, fmt("max error %.3g over r = 0.1, 0.5, 1", worst)};
}

Outcome lyapunov_oracle() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Mat4 a = oracle::random_stable_drift(rng);
    DiffusionMatrix d;
    d.diagonal << u(rng), u(rng), u(rng), u(rng);
    const Mat4 ref = oracle::lyapunov_steady_state(a, d.dense());
    using Vec16 = Eigen::Matrix<double, 16, 1>;
    auto rhs = [&](double, const Vec16& y) {
      const Mat4 dv = covariance_rhs(a, Eigen::Map<const Mat4>(y.data()), d);
      return Vec16(Eigen::Map<const Vec16>(dv.data()));
    };
    const Mat4 v0 = 0.5 * Mat4::Identity();
    DormandPrince<16, decltype(rhs)> ode(rhs, 0.0, Eigen::Map<const Vec16>(v0.data()),
                                         StepControl{.rtol = 1e-11, .atol = 1e-13});
    ode.advance_to(400.0);
    worst = std::max(worst, (Eigen::Map<const Mat4>(ode.state().data()) - ref).norm());
  }
  return {worst <= kLyapunovTol, fmt("20 systems, max Frobenius error %.3g", worst)};
}

Outcome drift_oracle() {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    SystemParams p = default_params();
    p.r_b = 0.45 * u(rng);
    p.theta = kTwoPi * u(rng);
    p.G_c = 0.05 * u(rng);
    p.G_m = 0.08 * u(rng);
    p.theta_c = kTwoPi * u(rng);
    p.theta_m = kTwoPi * u(rng);
    p.omega_m = 3.0 * u(rng);
    const MeanFieldState s{100.0 * u(rng), {3e4 * n(rng), 3e4 * n(rng)}, {1e3 * n(rng), 1e3 * n(rng)}};
    const Mat4 ref = oracle::brute_force_drift(s, p);
    const double err = (build_drift_matrix(s, p).entries - ref).cwiseAbs().maxCoeff() /
                       std::max(1.0, ref.cwiseAbs().maxCoeff());
    worst = std::max(worst, err);
  }
  return {worst <= kDriftTol, fmt("100 random states, max scaled error %.3g", worst)};
}

Outcome appendix_a_power_balance() {
  const SweepResult& r = preset_run("fig2");
  double worst = 0.0;
  int ok = 0;
  for (const auto& c : r.results) {
    if (c->verdict != Verdict::ok) continue;
    ++ok;
    worst = std::max(worst, c->diagnostics.power_balance_residual);
  }
  const bool pass = ok == static_cast<int>(r.results.size()) && worst <= kPowerBalanceTol;
  return {pass, fmt("%d/%zu cells converged, max residual %.3g", ok, r.results.size(), worst)};
}

Outcome appendix_a_alpha_scaling() {
  const SweepSpec base = figure_preset("fig2");
  std::string detail;
  double worst = 0.0;
  double ref_alpha = 0.0, ref_kappa = 0.0;
  for (double r_b : {0.0, 0.15, 0.35}) {
    SystemParams p = base.base;
    p.r_b = r_b;
    const CellResult c = evaluate_point(p, base.pipeline);
    if (c.verdict != Verdict::ok) return {false, fmt("r_b=%.2f not converged", r_b)};
    const double alpha = c.diagnostics.mean_abs_alpha;
    const double kappa = c.diagnostics.kappa_fb;
    if (r_b == 0.0) {
      ref_alpha = alpha;
      ref_kappa = kappa;
      continue;
    }
    const double measured = alpha / ref_alpha;
    const double predicted = ref_kappa / kappa;
    worst = std::max(worst, std::abs(measured / predicted - 1.0));
    detail += fmt("r_b=%.2f: <|a|> ratio %.3f vs 1/kappa_fb ratio %.3f; ", r_b, measured, predicted);
  }
  return {worst <= kScalingTol, detail + fmt("worst relative miss %.2f", worst)};
}

Outcome fig2d_entanglement_peak() {
  const SweepResult& r = preset_run("fig2");
  std::vector<double> e;
  for (const auto& c : r.results) {
    if (c->verdict != Verdict::ok) return {false, "unconverged cell on the fig2 axis"};
    e.push_back(c->maxima.E_N.value);
  }
  const auto peak = std::max_element(e.begin(), e.end()) - e.begin();
  const auto& x = r.spec.axis1.values;
  const bool interior = peak > 0 && peak + 1 < static_cast<long>(e.size());
  const bool rises = e[peak] > e.front();
  const bool falls = e[peak] > e.back();
  return {interior && rises && falls,
          fmt("E_N,max %.4f at r_b=0 -> peak %.4f at r_b=%.3f -> %.4f at r_b=%.2f", e.front(),
              e[peak], x[peak], e.back(), x.back())};
}

Outcome fig2d_phonon_damping_monotone() {
  const SweepResult& r = preset_run("fig2");
  const auto& x = r.spec.axis1.values;
  int drops = 0;
  double first_drop = NAN, last_drop = NAN;
  for (std::size_t k = 1; k < r.results.size(); ++k) {
    if (r.results[k]->diagnostics.dominant_phonon_re < r.results[k - 1]->diagnostics.dominant_phonon_re) {
      if (drops++ == 0) first_drop = x[k];
      last_drop = x[k];
    }
  }
  const double lo = r.results.front()->diagnostics.dominant_phonon_re;
  const double hi = r.results.back()->diagnostics.dominant_phonon_re;
  std::string detail = fmt("Re(lambda_m) %.4f at r_b=0 -> %.4f at r_b=%.2f", lo, hi, x.back());
  if (drops) detail += fmt("; decreases at %d steps within r_b in [%.3f, %.3f]", drops, first_drop, last_drop);
  return {drops == 0, detail};
}

Outcome fig3b_magnitudes() {
  const SweepResult& r = preset_run("fig3b");
  double best = -1.0, best_row = -1.0;
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const auto& c = *r.results[k];
    if (c.verdict != Verdict::ok) continue;
    best = std::max(best, c.maxima.E_N.value);
    if (r.cells[k].j == 0) best_row = std::max(best_row, c.maxima.E_N.value);
  }
  const bool pass = std::abs(best - kFig3bTarget) <= kFig3bTol &&
                    std::abs(best_row - kFig3bRowTarget) <= kFig3bTol;
  return {pass, fmt("grid max %.3f (target %.2f), r_b=0 row max %.3f (target %.2f), tol %.2f", best,
                    kFig3bTarget, best_row, kFig3bRowTarget, kFig3bTol)};
}

Outcome fig4_steering_transition() {
  const SweepResult& r = preset_run("fig4");
  double row_ab = 0.0, row_ba = 0.0;
  int two_way = 0;
  for (std::size_t k = 0; k < r.cells.size(); ++k) {
    const auto& c = *r.results[k];
    if (c.verdict != Verdict::ok) continue;
    if (r.cells[k].j == 0) {
      row_ab = std::max(row_ab, c.maxima.G_ab.value);
      row_ba = std::max(row_ba, c.maxima.G_ba.value);
    } else if (c.maxima.G_ab.value > 0.0 && c.maxima.G_ba.value > 0.0) {
      ++two_way;
    }
  }
  const bool one_way = (row_ab > 0.0) != (row_ba > 0.0);
  return {one_way && two_way > 0,
          fmt("r_b=0 row: max G_ab %.4f, max G_ba %.4f; %d two-way cells at r_b>0", row_ab, row_ba,
              two_way)};
}

Outcome floquet_periodicity() {
  std::vector<SystemParams> points;
  const SweepSpec f2 = figure_preset("fig2");
  for (double r_b : {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35}) {
    SystemParams p = f2.base;
    p.r_b = r_b;
    points.push_back(p);
  }
  const SweepSpec f4 = figure_preset("fig4");
  for (auto [ratio, r_b] : {std::pair{1.5, 0.0}, {1.7, 0.1}, {2.0, 0.2}, {1.0, 0.15}}) {
    SystemParams p = f4.base;
    p.omega_m = ratio * p.delta_c;
    p.r_b = r_b;
    points.push_back(p);
  }
  PipelineSettings fine;
  fine.cycle.integrator.rtol *= 0.5;
  fine.cycle.integrator.atol *= 0.5;
  int ok = 0;
  double worst_residual = 0.0, worst_shift = 0.0;
  for (const auto& p : points) {
    const CellResult a = evaluate_point(p);
    if (a.verdict != Verdict::ok) continue;
    const CellResult b = evaluate_point(p, fine);
    if (b.verdict != Verdict::ok) return {false, "cell converges at default tolerance only"};
    ++ok;
    worst_residual = std::max({worst_residual, a.diagnostics.poincare_residual,
                               b.diagnostics.poincare_residual});
    const auto& ma = a.maxima;
    const auto& mb = b.maxima;
    worst_shift = std::max({worst_shift, std::abs(ma.E_N.value - mb.E_N.value),
                            std::abs(ma.G_ab.value - mb.G_ab.value),
                            std::abs(ma.G_ba.value - mb.G_ba.value),
                            std::abs(ma.S_b.value - mb.S_b.value),
                            std::abs(ma.mu_b.value - mb.mu_b.value)});
  }
  const bool pass = ok >= 10 && worst_residual <= kPoincareTol && worst_shift < kMaximaShiftTol;
  return {pass, fmt("%d converged cells, max residual %.2g, max shift at rtol/2 %.2g", ok,
                    worst_residual, worst_shift)};
}

Outcome physicality_fig3a() {
  const SweepResult& r = preset_run("fig3a");
  int ok = 0;
  double nu = INFINITY, mu = 0.0;
  for (const auto& c : r.results) {
    if (c->verdict != Verdict::ok) continue;
    ++ok;
    nu = std::min(nu, c->maxima.min_symplectic);
    mu = std::max(mu, c->maxima.mu_b.value);
  }
  return {ok > 0 && nu >= kSymplecticFloor && mu <= 1.0,
          fmt("%d/%zu converged cells, min nu %.9f, max mu_b %.6f", ok, r.results.size(), nu, mu)};
}

// Determinism is checked end to end through the executable.

int spawn(const std::vector<std::string>& args, pid_t* child = nullptr) {
  std::vector<char*> argv;
  std::string bin = FBCOM_BINARY;
  argv.push_back(bin.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  const pid_t pid = fork();
  if (pid == 0) {
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      dup2(devnull, 1);
      dup2(devnull, 2);
    }
    execv(argv[0], argv.data());
    _exit(127);
  }
  if (child) {
    *child = pid;
    return 0;
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string manifest_without_clock(const fs::path& p) {
  Json m = Json::parse(slurp(p));
  m.erase("created_utc");
  return m.dump();
}

/// Names of files that differ; wall-clock files are excluded.
std::vector<std::string> differing(const fs::path& a, const fs::path& b) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(a)) {
    const std::string name = e.path().filename().string();
    if (name == "timing.csv" || name == "checkpoint.log") continue;
    const bool same = name == "manifest.json"
                          ? manifest_without_clock(e.path()) == manifest_without_clock(b / name)
                          : slurp(e.path()) == slurp(b / name);
    if (!same || !fs::exists(b / name)) out.push_back(name);
  }
  return out;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  return static_cast<std::size_t>(std::count(std::istreambuf_iterator<char>(in), {}, '\n'));
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("fbcom_acceptance_" + std::to_string(getpid()));
  fs::remove_all(root);
  const std::vector<std::string> job = {"figure", "fig4", "--grid", "17x13"};
  auto run = [&](const std::string& dir, std::vector<std::string> extra) {
    auto a = job;
    a.insert(a.end(), {"--out", (root / dir).string()});
    a.insert(a.end(), extra.begin(), extra.end());
    return spawn(a);
  };
  if (run("w1", {"--workers", "1"}) != 0 || run("w4", {"--workers", "4"}) != 0) {
    return {false, "sweep failed"};
  }
  const auto workers_diff = differing(root / "w1", root / "w4");

  // Kill a run part way, then resume it.
  auto a = job;
  a.insert(a.end(), {"--out", (root / "killed").string(), "--workers", "2"});
  pid_t pid = 0;
  spawn(a, &pid);
  const fs::path log = root / "killed" / "checkpoint.log";
  const std::size_t total = 17 * 13;
  std::size_t at_kill = 0;
  for (int k = 0; k < 20000; ++k) {
    at_kill = fs::exists(log) ? line_count(log) : 0;
    if (at_kill > total / 3) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  const bool killed = WIFSIGNALED(status);
  if (run("killed", {"--resume", "--workers", "3"}) != 0) return {false, "resume failed"};
  const auto resume_diff = differing(root / "w1", root / "killed");
  fs::remove_all(root);

  std::string detail = fmt("workers 1 vs 4: %zu differing files; killed after ~%zu/%zu cells%s, resumed: %zu differing files",
                           workers_diff.size(), at_kill > 0 ? at_kill - 1 : 0, total,
                           killed ? "" : " (run ended before the kill)", resume_diff.size());
  for (const auto& f : workers_diff) detail += " " + f;
  for (const auto& f : resume_diff) detail += " " + f;
  return {workers_diff.empty() && resume_diff.empty() && killed, detail};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"vacuum_identity", 1.0, vacuum_identity},
      {"tmsv_oracle", 1.0, tmsv_oracle},
      {"lyapunov_oracle", 60.0, lyapunov_oracle},
      {"drift_oracle", 10.0, drift_oracle},
      {"appendix_a_power_balance", 600.0, appendix_a_power_balance},
      {"appendix_a_alpha_scaling", 600.0, appendix_a_alpha_scaling},
      {"fig2d_entanglement_peak", 600.0, fig2d_entanglement_peak},
      {"fig2d_phonon_damping_monotone", 600.0, fig2d_phonon_damping_monotone},
      {"fig3b_magnitudes", 1800.0, fig3b_magnitudes},
      {"fig4_steering_transition", 1800.0, fig4_steering_transition},
      {"floquet_periodicity", 600.0, floquet_periodicity},
      {"physicality_fig3a", 1800.0, physicality_fig3a},
      {"determinism", 600.0, determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> ids(argv + 1, argv + argc);
  if (ids.size() == 1 && ids[0] == "--list") {
    for (const auto& c : criteria()) std::cout << c.id << '\n';
    return 0;
  }
  if (ids.empty()) {
    for (const auto& c : criteria()) ids.push_back(c.id);
  }
  int failures = 0;
  for (const auto& id : ids) {
    const auto it = std::find_if(criteria().begin(), criteria().end(),
                                 [&](const Criterion& c) { return c.id == id; });
    if (it == criteria().end()) {
      std::cout << "FAIL  " << id << "  unknown criterion\n";
      ++failures;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > it->budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", it->budget_s);
    }
    std::cout << (o.pass ? "PASS  " : "FAIL  ") << id << "  [" << fmt("%.2f s", dt) << "]  "
              << o.detail << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
