#include <numbers>

#include "fbcom/errors.hpp"
#include "fbcom/sweep.hpp"

namespace fbcom {

namespace {

constexpr int kDefault2D = 41;
constexpr int kDefault1D = 81;

struct Pumps {
  double E;
  double G_c;
  double G_m;
  double ratio;  // omega_m / delta_c
};

SystemParams base_with(const Pumps& pumps) {
  SystemParams p = default_params();
  p.delta_c = 1.18;
  p.E = pumps.E;
  p.G_c = pumps.G_c;
  p.G_m = pumps.G_m;
  p.omega_m = pumps.ratio * p.delta_c;
  return p;
}

SweepSpec grid(const char* name, const Pumps& pumps, SweepAxis a1, SweepAxis a2,
               std::vector<Measure> outputs) {
  SweepSpec s;
  s.name = name;
  s.base = base_with(pumps);
  s.axis1 = std::move(a1);
  s.axis2 = std::move(a2);
  s.outputs = std::move(outputs);
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig2", "fig3a", "fig3b", "fig4", "fig4ab", "fig4cd", "fig5",
          "fig6", "fig6a", "fig6b", "fig7", "fig7a", "fig7bc"};
}

SweepSpec figure_preset(std::string_view name, int n1, int n2) {
  const int a = n1 > 0 ? n1 : kDefault2D;
  const int b = n2 > 0 ? n2 : kDefault2D;
  auto ratio_axis = [&] { return SweepAxis{"omega_m_over_delta_c", linspace(0.5, 2.0, a)}; };
  auto amp_axis = [](int n) { return SweepAxis{"G_m_over_G_c", linspace(0.0, 3.0, n)}; };
  auto rb_axis = [&](double hi) { return SweepAxis{"r_b", linspace(0.0, hi, b)}; };
  const double two_pi = 2.0 * std::numbers::pi;

  if (name == "fig2") {
    SweepSpec s;
    s.name = "fig2";
    s.base = base_with({6.0e4, 0.02, 0.03, 1.7});
    s.axis1 = {"r_b", linspace(0.0, 0.35, n1 > 0 ? n1 : kDefault1D)};
    s.outputs = {Measure::E_N};
    return s;
  }
  if (name == "fig3a") {
    return grid("fig3a", {5.0e4, 0.02, 0.03, 1.7}, ratio_axis(), rb_axis(0.35), {Measure::E_N});
  }
  if (name == "fig3b") {
    return grid("fig3b", {5.0e4, 0.02, 0.03, 1.6}, amp_axis(a), rb_axis(0.35), {Measure::E_N});
  }
  if (name == "fig4" || name == "fig4ab") {
    return grid(name == "fig4" ? "fig4" : "fig4ab", {7.0e4, 0.03, 0.05, 1.7}, ratio_axis(),
                rb_axis(0.25), {Measure::G_ab, Measure::G_ba, Measure::E_N});
  }
  if (name == "fig4cd") {
    return grid("fig4cd", {6.0e4, 0.03, 0.05, 1.7}, amp_axis(a), rb_axis(0.3),
                {Measure::G_ab, Measure::G_ba, Measure::E_N});
  }
  if (name == "fig5") {
    return grid("fig5", {5.0e4, 0.02, 0.03, 1.7}, ratio_axis(), rb_axis(0.35),
                {Measure::mu_b, Measure::S_b});
  }
  if (name == "fig6" || name == "fig6a" || name == "fig6b") {
    const bool b_panel = name == "fig6b";
    SweepSpec s = grid(std::string(name).c_str(), {5.0e4, 0.02, 0.03, b_panel ? 1.3 : 1.5},
                       {"theta", linspace(0.0, two_pi, a)}, amp_axis(b),
                       {b_panel ? Measure::G_ab : Measure::E_N});
    s.base.r_b = b_panel ? 0.15 : 0.2;
    return s;
  }
  if (name == "fig7" || name == "fig7a") {
    return grid(name == "fig7" ? "fig7" : "fig7a", {5.0e4, 0.02, 0.03, 1.5},
                {"temperature_k", linspace(0.0, 1.0, a)}, rb_axis(0.35), {Measure::E_N});
  }
  if (name == "fig7bc") {
    return grid("fig7bc", {7.0e4, 0.02, 0.06, 1.5}, {"temperature_k", linspace(0.0, 1.0, a)},
                rb_axis(0.35), {Measure::G_ab, Measure::G_ba});
  }
  throw SpecError("unknown figure preset '" + std::string(name) + "'");
}

}  // namespace fbcom
