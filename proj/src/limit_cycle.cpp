#include "fbcom/limit_cycle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "fbcom/errors.hpp"

namespace fbcom {

Fraction rationalize(double x, double tol, std::int64_t max_den) {
  if (!std::isfinite(x)) throw QuasiPeriodicError("cannot rationalise a non-finite ratio");
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  const double target_err = tol * std::max(1.0, ax);
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(ax));
  std::int64_t k_prev = 0, k = 1;
  double rem = ax - std::floor(ax);
  while (std::abs(ax - static_cast<double>(h) / static_cast<double>(k)) > target_err) {
    if (rem <= 0.0) break;
    const double inv = 1.0 / rem;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    rem = inv - std::floor(inv);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) {
      throw QuasiPeriodicError("frequency ratio " + std::to_string(x) +
                               " is not rational within tolerance for denominators <= " +
                               std::to_string(max_den));
    }
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return {static_cast<std::int64_t>(sign) * h, k};
}

Fraction best_rational(double x, std::int64_t max_den) {
  if (!std::isfinite(x) || x < 0.0) throw DomainError("best_rational needs a finite x >= 0");
  if (max_den < 1) throw DomainError("max_den must be >= 1");
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(x));
  std::int64_t k_prev = 0, k = 1;
  double rem = x - std::floor(x);
  while (rem > 1e-15) {
    const double inv = 1.0 / rem;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    rem = inv - std::floor(inv);
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) {
      // Largest admissible semiconvergent, compared with the last convergent.
      const std::int64_t a_semi = (max_den - k_prev) / k;
      const Fraction semi{a_semi * h + h_prev, a_semi * k + k_prev};
      const Fraction conv{h, k};
      return std::abs(x - semi.value()) < std::abs(x - conv.value()) ? semi : conv;
    }
    const std::int64_t h_next = a * h + h_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return {h, k};
}

ModulationPeriod modulation_period(const SystemParams& p, double rational_tol,
                                   std::int64_t max_den) {
  const bool opa = p.G_c > 0.0 && p.delta_c != 0.0;
  const bool mpa = p.G_m > 0.0 && p.omega_m != 0.0;
  ModulationPeriod out;
  if (!opa && !mpa) {
    out.tau = kTwoPi / SystemParams::omega_b();
    out.constant = true;
    return out;
  }
  if (opa && !mpa) {
    out.tau = kTwoPi / std::abs(p.delta_c);
    return out;
  }
  if (!opa && mpa) {
    out.tau = kTwoPi / std::abs(p.omega_m);
    return out;
  }
  out.ratio = rationalize(std::abs(p.omega_m / p.delta_c), rational_tol, max_den);
  out.tau = kTwoPi * static_cast<double>(out.ratio.den) / std::abs(p.delta_c);
  return out;
}

double poincare_residual(const PackedState& start, const PackedState& end) {
  double r = 0.0;
  for (int i = 0; i < kStateSize; ++i) {
    r = std::max(r, std::abs(end[i] - start[i]) / (1.0 + std::abs(start[i])));
  }
  return r;
}

namespace {

int samples_for(const CycleSettings& s) {
  if (s.samples_per_period < 64) {
    throw DomainError("at least 64 samples per period are required");
  }
  return s.samples_per_period;
}

double default_transient(const CycleSettings& s, double tau) {
  return s.transient_time > 0.0 ? s.transient_time : std::max(200.0, 4.0 * tau);
}

double covariance_norm(const PackedState& y) { return y.tail<16>().cwiseAbs().maxCoeff(); }

void append_sample(LimitCycle& cycle, const PackedState& y, double t) {
  cycle.orbit.push_back(unpack_mean_field(y, t));
  cycle.covariance.push_back(unpack_covariance(y));
}

}  // namespace

LimitCycle detect_limit_cycle(const Trajectory& traj, const SystemParams& params,
                              const CycleSettings& settings) {
  const ModulationPeriod period =
      modulation_period(params, settings.rational_tol, settings.max_denominator);
  const int n = samples_for(settings);
  const double tau = period.tau;
  if (traj.samples.size() < 2) throw DomainError("trajectory too short");
  const double window_start = std::max(traj.t_begin(), default_transient(settings, tau));
  if (traj.t_end() - window_start < 3.0 * tau) {
    throw DomainError("trajectory must hold at least three periods after the transient");
  }

  const double t_last = traj.t_end() - tau;
  double residual = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = t_last - tau + tau * k / n;
    residual = std::max(residual, poincare_residual(traj.interpolate(t), traj.interpolate(t + tau)));
  }
  if (residual > settings.residual_tolerance) {
    throw NotConvergedError("Poincare residual " + std::to_string(residual) +
                            " above tolerance; extend t_end");
  }
  LimitCycle cycle;
  cycle.tau = tau;
  cycle.poincare_residual = residual;
  cycle.settle_time = t_last;
  for (int k = 0; k < n; ++k) {
    const double t = t_last + tau * k / n;
    append_sample(cycle, traj.interpolate(t), t);
  }
  return cycle;
}

LimitCycle settle_limit_cycle(const SystemParams& params, const CycleSettings& settings) {
  const ModulationPeriod period =
      modulation_period(params, settings.rational_tol, settings.max_denominator);
  const int n = samples_for(settings);
  const double tau = period.tau;
  const auto started = std::chrono::steady_clock::now();
  auto over_budget = [&] {
    if (settings.wall_budget_s <= 0.0) return false;
    const std::chrono::duration<double> used = std::chrono::steady_clock::now() - started;
    return used.count() > settings.wall_budget_s;
  };

  CoupledEvolution evo(params, settings.integrator);
  // Last period boundary, for the growth estimate if the run blows up.
  double t_mark = evo.time();
  double norm_mark = covariance_norm(evo.state());
  auto mark = [&] {
    t_mark = evo.time();
    norm_mark = covariance_norm(evo.state());
  };
  auto advance = [&](double t) {
    try {
      evo.advance_to(t);
    } catch (const DivergenceError& e) {
      double norm_now = covariance_norm(evo.state());
      if (!std::isfinite(norm_now)) norm_now = settings.integrator.covariance_blowup;
      const double dt = evo.time() - t_mark;
      const double rate = dt > 0.0 && norm_mark > 0.0
                              ? std::log(norm_now / norm_mark) / (2.0 * dt)
                              : std::numeric_limits<double>::quiet_NaN();
      throw DivergenceError(e.what(), evo.time(), rate);
    }
  };
  if (settings.wall_budget_s > 0.0) {
    evo.set_deadline(started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                   std::chrono::duration<double>(settings.wall_budget_s)));
  }
  // Advance by whole periods so sampling always starts at a multiple of tau.
  const double transient = default_transient(settings, tau);
  const double first_check = tau * std::ceil(transient / tau);
  for (double t = tau; t < first_check + 0.5 * tau; t += tau) {
    advance(std::min(t, first_check));
    mark();
    if (over_budget()) throw NotConvergedError("wall-time budget exhausted during transient");
  }

  double residual = std::numeric_limits<double>::infinity();
  while (true) {
    const PackedState start = evo.state();
    const double t0 = evo.time();
    advance(t0 + tau);
    mark();
    residual = poincare_residual(start, evo.state());
    if (residual <= settings.residual_tolerance) break;
    if (evo.time() > settings.max_time) {
      throw NotConvergedError("no periodic orbit by t=" + std::to_string(evo.time()) +
                              " (residual " + std::to_string(residual) + ")");
    }
    if (over_budget()) throw NotConvergedError("wall-time budget exhausted");
  }

  LimitCycle cycle;
  cycle.tau = tau;
  cycle.settle_time = evo.time();
  const double t0 = evo.time();
  const PackedState start = evo.state();
  append_sample(cycle, start, t0);
  for (int k = 1; k < n; ++k) {
    const double t = t0 + tau * k / n;
    advance(t);
    append_sample(cycle, evo.state(), t);
  }
  advance(t0 + tau);
  cycle.poincare_residual = poincare_residual(start, evo.state());
  return cycle;
}

StabilityReport instantaneous_stability(const SystemParams& params, const MeanFieldState& state) {
  const DriftMatrix a = build_drift_matrix(state, params);
  Eigen::EigenSolver<Mat4> solver(a.entries, true);
  const auto values = solver.eigenvalues();
  const auto vectors = solver.eigenvectors();
  StabilityReport r;
  r.max_re_eig = -std::numeric_limits<double>::infinity();
  r.dominant_phonon_re = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const double re = values[i].real();
    r.max_re_eig = std::max(r.max_re_eig, re);
    const auto v = vectors.col(i);
    const double phonon = std::norm(v[2]) + std::norm(v[3]);
    const double photon = std::norm(v[0]) + std::norm(v[1]);
    if (phonon >= photon) r.dominant_phonon_re = std::max(r.dominant_phonon_re, re);
  }
  r.stable = r.max_re_eig < 0.0;
  return r;
}

StabilityReport stability_check(const SystemParams& params, const LimitCycle& cycle) {
  if (cycle.orbit.size() < 64) throw DomainError("stability check needs >= 64 cycle samples");
  StabilityReport total;
  total.max_re_eig = -std::numeric_limits<double>::infinity();
  total.dominant_phonon_re = -std::numeric_limits<double>::infinity();
  for (const auto& s : cycle.orbit) {
    const StabilityReport r = instantaneous_stability(params, s);
    total.max_re_eig = std::max(total.max_re_eig, r.max_re_eig);
    total.dominant_phonon_re = std::max(total.dominant_phonon_re, r.dominant_phonon_re);
  }
  total.stable = total.max_re_eig < 0.0;
  return total;
}

PowerBalance power_balance(const LimitCycle& cycle, const SystemParams& params) {
  if (cycle.orbit.empty()) throw DomainError("empty cycle");
  const DerivedParams d = derive(params);
  const cplx i{0.0, 1.0};
  PowerBalance pb;
  for (const auto& s : cycle.orbit) {
    const cplx ac = std::conj(s.alpha);
    const cplx opa = 2.0 * params.G_c * ac * std::polar(1.0, -(params.delta_c * s.t - params.theta_c));
    pb.mean_photon_number += std::norm(s.alpha);
    pb.mean_abs_alpha += std::abs(s.alpha);
    pb.p_om += 2.0 * (ac * (i * params.g * s.alpha * (2.0 * s.beta.real()))).real();
    pb.p_opa += 2.0 * (ac * opa).real();
    pb.p_drv += 2.0 * (ac * d.t_b * params.E).real();
  }
  const auto n = static_cast<double>(cycle.orbit.size());
  pb.mean_photon_number /= n;
  pb.mean_abs_alpha /= n;
  pb.p_om /= n;
  pb.p_opa /= n;
  pb.p_drv /= n;
  pb.lhs = 2.0 * d.kappa_fb * pb.mean_photon_number;
  const double rhs = pb.p_om + pb.p_opa + pb.p_drv;
  const double scale = std::max(std::abs(pb.lhs), std::abs(rhs));
  pb.residual = scale == 0.0 ? 0.0 : std::abs(pb.lhs - rhs) / scale;
  return pb;
}

double power_balance_residual(const LimitCycle& cycle, const SystemParams& params) {
  return power_balance(cycle, params).residual;
}

}  // namespace fbcom
