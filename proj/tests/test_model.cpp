#include <gtest/gtest.h>

#include <cmath>

#include "fbcom/errors.hpp"
#include "fbcom/model.hpp"

using namespace fbcom;

TEST(Model, ThermalOccupationAtDefaults) {
  const double omega = kTwoPi * 1.0e6;
  const double n = thermal_occupation(omega, 0.02);
  // High-temperature series kT/(hbar w) - 1/2 + hbar w/(12 kT) is good to ~1e-10 here.
  const double x = codata::hbar * omega / (codata::k_boltzmann * 0.02);
  EXPECT_NEAR(n, 1.0 / x - 0.5 + x / 12.0, 1e-6);
  EXPECT_NEAR(n, 416.2, 0.05);
  EXPECT_NEAR(default_params().n_b, n, 1e-12);
}

TEST(Model, ZeroTemperatureHasNoPhonons) {
  EXPECT_EQ(thermal_occupation(kTwoPi * 1.0e6, 0.0), 0.0);
}

TEST(Model, DriveFromLaserPower) {
  const double kappa_si = kTwoPi * 0.5e6;
  const double e = drive_amplitude_from_power(2.9e-3, 1550e-9, kappa_si);
  EXPECT_NEAR(e / (kTwoPi * 60e9), 1.0, 0.02);
  EXPECT_NEAR(laser_power_from_drive(e, 1550e-9, kappa_si), 2.9e-3, 1e-15);
  EXPECT_NEAR(drive_amplitude_from_power(2.9e-3, 1550e-9, kappa_si, kTwoPi * 1e6), 6.0e4, 0.02 * 6e4);
  EXPECT_THROW((void)drive_amplitude_from_power(0.0, 1550e-9, kappa_si), DomainError);
}

TEST(Model, FeedbackRenormalisation) {
  EXPECT_DOUBLE_EQ(effective_decay(0.5, 0.0, 1.3), 0.5);
  EXPECT_DOUBLE_EQ(effective_decay(0.5, 0.2, 0.0), 0.5 * 0.6);
  EXPECT_NEAR(effective_decay(0.5, 0.2, std::numbers::pi), 0.5 * 1.4, 1e-15);
  EXPECT_NEAR(effective_detuning(1.0, 0.5, 0.2, std::numbers::pi / 2), 1.0 - 0.2, 1e-15);
  EXPECT_LT(effective_decay(0.5, 0.6, 0.0), 0.0);

  SystemParams p = default_params();
  p.r_b = 0.6;
  const DerivedParams d = derive(p);
  EXPECT_NEAR(d.t_b, 0.8, 1e-15);
  EXPECT_LT(d.kappa_fb, 0.0);
}

TEST(Model, DelayValidity) {
  const DelayValidity v = delay_validity(kTwoPi * 0.5e6, 0.35, 1e-9);
  EXPECT_NEAR(v.ratio, 2.199e-3, 1e-6);
  EXPECT_TRUE(v.valid);
  EXPECT_FALSE(delay_validity(kTwoPi * 0.5e6, 0.35, 1e-7).valid);
}

TEST(Model, UnitConversionsRoundTrip) {
  const double w = kTwoPi * 1.0e6;
  EXPECT_DOUBLE_EQ(hz_to_solver_units(0.5e6, w), 0.5);
  EXPECT_DOUBLE_EQ(solver_units_to_hz(0.5, w), 0.5e6);
  EXPECT_DOUBLE_EQ(to_si(to_solver_units(1234.5, w), w), 1234.5);
}

TEST(Model, DefaultsMatchPaperScale) {
  const SystemParams p = default_params();
  EXPECT_DOUBLE_EQ(p.kappa_a, 0.5);
  EXPECT_DOUBLE_EQ(p.kappa_b, 1e-6);
  EXPECT_DOUBLE_EQ(p.g, 4e-6);
  EXPECT_DOUBLE_EQ(p.E, 6e4);
  EXPECT_DOUBLE_EQ(p.delta_c, 1.18);
  EXPECT_NO_THROW(validate(p));
}

TEST(Model, ValidationRejectsBadValues) {
  auto bad = [](auto edit) {
    SystemParams p = default_params();
    edit(p);
    return p;
  };
  EXPECT_THROW(validate(bad([](SystemParams& p) { p.r_b = 1.2; })), DomainError);
  EXPECT_THROW(validate(bad([](SystemParams& p) { p.kappa_a = -1.0; })), DomainError);
  EXPECT_THROW(validate(bad([](SystemParams& p) { p.temperature_k = -0.1; })), DomainError);
  EXPECT_THROW(validate(bad([](SystemParams& p) { p.G_c = std::nan(""); })), DomainError);
}

TEST(Model, CooperativityFormula) {
  EXPECT_DOUBLE_EQ(effective_cooperativity(4e-6, 1e10, 0.5, 1e-6), 4.0 * 16e-12 * 1e10 / 0.5e-6);
}
