#pragma once

#include <numbers>

namespace fbcom {

/// CODATA 2018 exact / recommended values, SI.
namespace codata {
inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23;  // J / K
inline constexpr double speed_of_light = 299792458.0;  // m / s
}  // namespace codata

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Switches for the alternative readings of the fluctuation drift matrix.
struct ModelVariant {
  /// Use -omega_m - zeta_m in entry (4,3) instead of -omega_b - zeta_m.
  bool literal_omega_m_entry = false;
  /// Evaluate the OPA phase of Gamma_a/zeta_a with Delta_a instead of Delta_c.
  bool opa_phase_uses_delta_a = false;
};

/// Physical parameters of the fed-back, dually pumped optomechanical system.
///
/// Every rate, frequency and amplitude is stored in units of the mechanical
/// frequency, so omega_b == 1 inside the solver; omega_b_si keeps the scale
/// needed to ingest and report SI values.
struct SystemParams {
  double omega_b_si = kTwoPi * 1.0e6;  // rad/s

  double kappa_a = 0.5;
  double kappa_b = 1.0e-6;
  double delta_a = 1.0;
  double delta_c = 1.18;
  double omega_m = 1.7 * 1.18;
  double g = 4.0e-6;
  double G_c = 0.0;
  double theta_c = 0.0;
  double G_m = 0.0;
  double theta_m = 0.0;
  double E = 6.0e4;
  double r_b = 0.0;
  double theta = 0.0;

  double temperature_k = 0.02;
  double n_a = 0.0;
  double n_b = 0.0;

  ModelVariant variant{};

  /// Beam-splitter transmission, sqrt(1 - r_b^2).
  [[nodiscard]] double t_b() const;

  /// Mechanical frequency in solver units (always 1).
  [[nodiscard]] static constexpr double omega_b() { return 1.0; }
};

/// Closed-form quantities the feedback loop induces on the cavity.
struct DerivedParams {
  double kappa_fb = 0.0;
  double delta_fb = 0.0;
  double t_b = 1.0;
};

/// Throws DomainError when a SystemParams violates its invariants.
void validate(const SystemParams& p);

[[nodiscard]] DerivedParams derive(const SystemParams& p);

/// kappa_a (1 - 2 r_b cos theta). Negative values mean net gain.
[[nodiscard]] double effective_decay(double kappa_a, double r_b, double theta);

/// Delta_a - 2 kappa_a r_b sin theta.
[[nodiscard]] double effective_detuning(double delta_a, double kappa_a, double r_b, double theta);

/// Drive amplitude sqrt(2 kappa_a P / (hbar omega_l)) in rad/s.
[[nodiscard]] double drive_amplitude_from_power(double power_w, double wavelength_m,
                                                double kappa_a_si);

/// Same, expressed in units of omega_b_si.
[[nodiscard]] double drive_amplitude_from_power(double power_w, double wavelength_m,
                                                double kappa_a_si, double omega_b_si);

/// Inverse of drive_amplitude_from_power: laser power (W) for an SI amplitude (rad/s).
[[nodiscard]] double laser_power_from_drive(double drive_si, double wavelength_m,
                                            double kappa_a_si);

/// Bose-Einstein occupation of a mode at angular frequency omega_si (rad/s).
[[nodiscard]] double thermal_occupation(double omega_si, double temperature_k);

/// 4 g^2 <|alpha|^2> / (kappa_fb kappa_b).
[[nodiscard]] double effective_cooperativity(double g, double mean_photon_number,
                                             double kappa_fb, double kappa_b);

struct DelayValidity {
  double ratio = 0.0;
  bool valid = true;
};

/// |2 kappa_a r_b t_d| against a threshold; kappa_a in rad/s, t_d in seconds.
[[nodiscard]] DelayValidity delay_validity(double kappa_a_si, double r_b, double delay_s,
                                           double threshold = 0.01);

/// Unit conversions between SI angular rates and solver units.
[[nodiscard]] double to_solver_units(double rate_rad_per_s, double omega_b_si);
[[nodiscard]] double to_si(double rate_solver, double omega_b_si);
[[nodiscard]] double hz_to_solver_units(double freq_over_2pi_hz, double omega_b_si);
[[nodiscard]] double solver_units_to_hz(double rate_solver, double omega_b_si);

/// Paper-scale defaults: omega_b/2pi = 1 MHz, kappa_a/2pi = 0.5 MHz,
/// kappa_b/2pi = 1 Hz, g/2pi = 4 Hz, E/2pi = 60 GHz, T = 20 mK, N_b from T.
[[nodiscard]] SystemParams default_params();

/// Recomputes n_b from temperature_k and omega_b_si.
void refresh_thermal_occupation(SystemParams& p);

}  // namespace fbcom
