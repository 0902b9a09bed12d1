#include "fbcom/model.hpp"

#include <cmath>
#include <string>

#include "fbcom/errors.hpp"

namespace fbcom {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

double SystemParams::t_b() const { return std::sqrt(1.0 - r_b * r_b); }

void validate(const SystemParams& p) {
  require(std::isfinite(p.omega_b_si) && p.omega_b_si > 0.0, "omega_b must be positive");
  require(finite_nonneg(p.kappa_a), "kappa_a must be >= 0");
  require(finite_nonneg(p.kappa_b), "kappa_b must be >= 0");
  require(finite_nonneg(p.g), "g must be >= 0");
  require(finite_nonneg(p.G_c), "G_c must be >= 0");
  require(finite_nonneg(p.G_m), "G_m must be >= 0");
  require(finite_nonneg(p.E), "E must be >= 0");
  require(std::isfinite(p.r_b) && p.r_b >= 0.0 && p.r_b < 1.0, "r_b must lie in [0, 1)");
  require(finite_nonneg(p.temperature_k), "temperature must be >= 0");
  require(finite_nonneg(p.n_a), "N_a must be >= 0");
  require(finite_nonneg(p.n_b), "N_b must be >= 0");
  for (double x : {p.delta_a, p.delta_c, p.omega_m, p.theta_c, p.theta_m, p.theta}) {
    require(std::isfinite(x), "frequencies and phases must be finite");
  }
}

DerivedParams derive(const SystemParams& p) {
  return {effective_decay(p.kappa_a, p.r_b, p.theta),
          effective_detuning(p.delta_a, p.kappa_a, p.r_b, p.theta), p.t_b()};
}

double effective_decay(double kappa_a, double r_b, double theta) {
  return kappa_a * (1.0 - 2.0 * r_b * std::cos(theta));
}

double effective_detuning(double delta_a, double kappa_a, double r_b, double theta) {
  return delta_a - 2.0 * kappa_a * r_b * std::sin(theta);
}

double drive_amplitude_from_power(double power_w, double wavelength_m, double kappa_a_si) {
  if (!(power_w > 0.0) || !(wavelength_m > 0.0) || !(kappa_a_si > 0.0)) {
    throw DomainError("drive amplitude needs positive power, wavelength and decay rate");
  }
  const double omega_l = kTwoPi * codata::speed_of_light / wavelength_m;
  return std::sqrt(2.0 * kappa_a_si * power_w / (codata::hbar * omega_l));
}

double drive_amplitude_from_power(double power_w, double wavelength_m, double kappa_a_si,
                                  double omega_b_si) {
  return to_solver_units(drive_amplitude_from_power(power_w, wavelength_m, kappa_a_si), omega_b_si);
}

double laser_power_from_drive(double drive_si, double wavelength_m, double kappa_a_si) {
  if (!(drive_si > 0.0) || !(wavelength_m > 0.0) || !(kappa_a_si > 0.0)) {
    throw DomainError("laser power needs positive drive, wavelength and decay rate");
  }
  const double omega_l = kTwoPi * codata::speed_of_light / wavelength_m;
  return drive_si * drive_si * codata::hbar * omega_l / (2.0 * kappa_a_si);
}

double thermal_occupation(double omega_si, double temperature_k) {
  if (!(omega_si > 0.0)) throw DomainError("thermal occupation needs omega > 0");
  if (!(temperature_k >= 0.0)) throw DomainError("temperature must be >= 0");
  if (temperature_k == 0.0) return 0.0;
  const double x = codata::hbar * omega_si / (codata::k_boltzmann * temperature_k);
  return 1.0 / std::expm1(x);
}

double effective_cooperativity(double g, double mean_photon_number, double kappa_fb,
                               double kappa_b) {
  if (!(kappa_fb > 0.0)) {
    throw GainRegimeError("cooperativity undefined for kappa_fb <= 0");
  }
  if (!(kappa_b > 0.0)) throw DomainError("cooperativity needs kappa_b > 0");
  return 4.0 * g * g * mean_photon_number / (kappa_fb * kappa_b);
}

DelayValidity delay_validity(double kappa_a_si, double r_b, double delay_s, double threshold) {
  const double ratio = std::abs(2.0 * kappa_a_si * r_b * delay_s);
  return {ratio, ratio < threshold};
}

double to_solver_units(double rate_rad_per_s, double omega_b_si) {
  return rate_rad_per_s / omega_b_si;
}

double to_si(double rate_solver, double omega_b_si) { return rate_solver * omega_b_si; }

double hz_to_solver_units(double freq_over_2pi_hz, double omega_b_si) {
  return kTwoPi * freq_over_2pi_hz / omega_b_si;
}

double solver_units_to_hz(double rate_solver, double omega_b_si) {
  return rate_solver * omega_b_si / kTwoPi;
}

void refresh_thermal_occupation(SystemParams& p) {
  p.n_b = thermal_occupation(p.omega_b_si, p.temperature_k);
}

SystemParams default_params() {
  SystemParams p;
  p.omega_b_si = kTwoPi * 1.0e6;
  p.kappa_a = hz_to_solver_units(0.5e6, p.omega_b_si);
  p.kappa_b = hz_to_solver_units(1.0, p.omega_b_si);
  p.g = hz_to_solver_units(4.0, p.omega_b_si);
  p.E = hz_to_solver_units(60.0e9, p.omega_b_si);
  p.temperature_k = 0.02;
  p.n_a = 0.0;
  refresh_thermal_occupation(p);
  return p;
}

}  // namespace fbcom
