#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbcom/errors.hpp"

namespace fbcom {

struct StepControl {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 1e-2;
  double max_step = 0.5;
  /// Any |y_i| above this is treated as divergence.
  double blowup = 1e15;
  /// Accepted plus rejected steps allowed over the stepper's lifetime; <= 0 disables.
  long max_steps = 0;
};

/// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with FSAL and
/// elementary step-size control. Rhs is callable as rhs(t, y) -> dy.
template <int N, class Rhs>
class DormandPrince {
 public:
  using State = Eigen::Matrix<double, N, 1>;

  DormandPrince(Rhs rhs, double t0, const State& y0, StepControl control)
      : rhs_(std::move(rhs)), t_(t0), y_(y0), control_(control), h_(control.initial_step) {
    k1_ = rhs_(t_, y_);
  }

  [[nodiscard]] double time() const { return t_; }
  [[nodiscard]] const State& state() const { return y_; }
  [[nodiscard]] const State& derivative() const { return k1_; }
  [[nodiscard]] long accepted_steps() const { return accepted_; }
  [[nodiscard]] long rejected_steps() const { return rejected_; }

  /// Replaces the state in place (e.g. after symmetrisation); re-evaluates FSAL slope.
  void reset_state(const State& y) {
    y_ = y;
    k1_ = rhs_(t_, y_);
  }

  /// Advances adaptively and lands exactly on t_target. Post-step hook is
  /// called with the state after each accepted step and may edit it.
  template <class Hook>
  void advance_to(double t_target, Hook&& hook) {
    while (t_ < t_target) {
      double h = std::min({h_, control_.max_step, t_target - t_});
      const bool last = (t_ + h >= t_target);
      if (last) h = t_target - t_;
      if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_))) {
        if (last) {
          t_ = t_target;
          return;
        }
        throw DivergenceError("step size underflow at t=" + std::to_string(t_));
      }
      attempt(h, last ? t_target : t_ + h, hook);
    }
  }

  void advance_to(double t_target) {
    advance_to(t_target, [](State&) { return false; });
  }

 private:
  template <class Hook>
  void attempt(double h, double t_new, Hook&& hook) {
    if (control_.max_steps > 0 && accepted_ + rejected_ >= control_.max_steps) {
      throw NotConvergedError("step budget exhausted at t=" + std::to_string(t_));
    }
    // Butcher tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const State k2 = rhs_(t_ + c2 * h, y_ + h * (a21 * k1_));
    const State k3 = rhs_(t_ + c3 * h, y_ + h * (a31 * k1_ + a32 * k2));
    const State k4 = rhs_(t_ + c4 * h, y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3));
    const State k5 = rhs_(t_ + c5 * h, y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 =
        rhs_(t_ + h, y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    State y_new = y_ + h * (b1 * k1_ + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const State k7 = rhs_(t_ + h, y_new);
    const State err = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
      const double scale =
          control_.atol + control_.rtol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
      const double r = err[i] / scale;
      sum += r * r;
    }
    const double norm = std::sqrt(sum / N);
    if (!std::isfinite(norm)) {
      ++rejected_;
      h_ = 0.1 * h;
      check_underflow();
      return;
    }

    if (norm <= 1.0) {
      for (int i = 0; i < N; ++i) {
        if (!std::isfinite(y_new[i]) || std::abs(y_new[i]) > control_.blowup) {
          throw DivergenceError("state left the finite range at t=" + std::to_string(t_new));
        }
      }
      t_ = t_new;
      y_ = y_new;
      k1_ = k7;
      if (hook(y_)) k1_ = rhs_(t_, y_);
      ++accepted_;
      const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      // Keep the last non-truncated step size so landing on t_target does not shrink h.
      if (h >= h_) h_ = h * fac;
      else h_ = std::max(h_, h * fac);
    } else {
      ++rejected_;
      h_ = h * std::clamp(0.9 * std::pow(norm, -0.2), 0.1, 1.0);
      check_underflow();
    }
  }

  void check_underflow() const {
    if (h_ <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_))) {
      throw DivergenceError("step size underflow at t=" + std::to_string(t_));
    }
  }

  Rhs rhs_;
  double t_;
  State y_;
  State k1_;
  StepControl control_;
  double h_;
  long accepted_ = 0;
  long rejected_ = 0;
};

}  // namespace fbcom
