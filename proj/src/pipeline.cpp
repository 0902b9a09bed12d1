#include "fbcom/pipeline.hpp"

#include <cmath>
#include <limits>

#include "fbcom/errors.hpp"

namespace fbcom {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

CellDiagnostics blank_diagnostics(const SystemParams& p) {
  CellDiagnostics d;
  d.kappa_fb = derive(p).kappa_fb;
  d.tau = d.settle_time = d.poincare_residual = kNaN;
  d.cooperativity = d.power_balance_residual = kNaN;
  d.max_re_eig = d.dominant_phonon_re = d.growth_rate = kNaN;
  d.mean_abs_alpha = d.mean_photon_number = kNaN;
  return d;
}

PeriodicMaxima blank_maxima() {
  PeriodicMaxima m;
  for (MeasureMaximum* x : {&m.E_N, &m.G_ab, &m.G_ba, &m.S_b, &m.mu_b, &m.E_N_raw, &m.G_ab_raw,
                            &m.G_ba_raw}) {
    *x = {kNaN, kNaN};
  }
  m.min_symplectic = kNaN;
  return m;
}

PointRun failed(Verdict v, std::string message, CellDiagnostics d) {
  PointRun run;
  run.result.verdict = v;
  run.result.message = std::move(message);
  run.result.maxima = blank_maxima();
  run.result.diagnostics = d;
  return run;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::unstable: return "unstable";
    case Verdict::not_converged: return "not-converged";
    case Verdict::quasi_periodic: return "quasi-periodic";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view name) {
  for (Verdict v : {Verdict::ok, Verdict::unstable, Verdict::not_converged, Verdict::quasi_periodic}) {
    if (to_string(v) == name) return v;
  }
  throw SpecError("unknown verdict '" + std::string(name) + "'");
}

PointRun run_point(const SystemParams& params, const PipelineSettings& settings) {
  validate(params);
  CellDiagnostics diag = blank_diagnostics(params);
  if (!(diag.kappa_fb > 0.0)) {
    return failed(Verdict::unstable, "kappa_fb <= 0: cavity in the gain regime", diag);
  }

  LimitCycle cycle;
  try {
    cycle = settle_limit_cycle(params, settings.cycle);
  } catch (const DivergenceError& e) {
    diag.growth_rate = e.growth_rate;
    diag.settle_time = e.time;
    return failed(Verdict::unstable, e.what(), diag);
  } catch (const QuasiPeriodicError& e) {
    return failed(Verdict::quasi_periodic, e.what(), diag);
  } catch (const NotConvergedError& e) {
    return failed(Verdict::not_converged, e.what(), diag);
  }

  diag.tau = cycle.tau;
  diag.settle_time = cycle.settle_time;
  diag.poincare_residual = cycle.poincare_residual;

  const StabilityReport stab = stability_check(params, cycle);
  diag.max_re_eig = stab.max_re_eig;
  diag.dominant_phonon_re = stab.dominant_phonon_re;
  const PowerBalance pb = power_balance(cycle, params);
  diag.power_balance_residual = pb.residual;
  diag.mean_abs_alpha = pb.mean_abs_alpha;
  diag.mean_photon_number = pb.mean_photon_number;
  if (params.kappa_b > 0.0) {
    diag.cooperativity =
        effective_cooperativity(params.g, pb.mean_photon_number, diag.kappa_fb, params.kappa_b);
  }
  if (!stab.stable) {
    PointRun run = failed(Verdict::unstable, "drift matrix has an eigenvalue with Re >= 0 on the cycle",
                          diag);
    run.cycle = std::move(cycle);
    return run;
  }

  PointRun run;
  run.records.reserve(cycle.covariance.size());
  try {
    for (std::size_t k = 0; k < cycle.covariance.size(); ++k) {
      run.records.push_back(evaluate(cycle.covariance[k], cycle.orbit[k].t, settings.reading));
    }
  } catch (const NumericalDegeneracyError& e) {
    return failed(Verdict::not_converged, e.what(), diag);
  } catch (const DomainError& e) {
    return failed(Verdict::not_converged, e.what(), diag);
  }
  run.result.maxima = periodic_maxima(run.records, cycle.tau);
  run.result.diagnostics = diag;
  run.cycle = std::move(cycle);
  return run;
}

CellResult evaluate_point(const SystemParams& params, const PipelineSettings& settings) {
  return run_point(params, settings).result;
}

}  // namespace fbcom
