#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace hysteresis {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double blowup_threshold = 1e6;
  double t_end = 100.0;
  double output_step = 0.1;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// The step size collapsed below 1e-14 * t_end.
class StepSizeUnderflow : public std::runtime_error {
 public:
  explicit StepSizeUnderflow(double t)
      : std::runtime_error("step size underflow at t = " + std::to_string(t)), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
  long events = 0;
};

template <int Dim>
using StateVector = Eigen::Matrix<double, Dim, 1>;

/// One accepted step with the data needed for cubic Hermite interpolation.
template <int Dim>
struct StepSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  StateVector<Dim> y0;
  StateVector<Dim> f0;
  StateVector<Dim> y1;
  StateVector<Dim> f1;

  StateVector<Dim> interpolate(double t) const {
    const double h = t1 - t0;
    if (h == 0.0) return y1;
    const double s = (t - t0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * f1;
  }
};

/// Dormand-Prince 5(4) stage evaluation. The fifth-order solution is
/// propagated; the embedded fourth-order solution only feeds the error
/// estimate.
template <int Dim>
struct DormandPrince45 {
  using Vec = StateVector<Dim>;

  struct Trial {
    Vec y1;
    Vec f1;
    double error = 0.0;  ///< max_i |e_i| / (atol + rtol max(|y0_i|, |y1_i|))
  };

  template <typename Rhs>
  static Trial step(Rhs&& rhs, double t, const Vec& y, const Vec& f0, double h, double rtol,
                    double atol) {
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

    const Vec k2 = rhs(t + c2 * h, (y + h * (a21 * f0)).eval());
    const Vec k3 = rhs(t + c3 * h, (y + h * (a31 * f0 + a32 * k2)).eval());
    const Vec k4 = rhs(t + c4 * h, (y + h * (a41 * f0 + a42 * k2 + a43 * k3)).eval());
    const Vec k5 = rhs(t + c5 * h, (y + h * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
    const Vec k6 =
        rhs(t + h, (y + h * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
    Trial out;
    out.y1 = y + h * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    out.f1 = rhs(t + h, out.y1);
    const Vec err = h * (e1 * f0 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.f1);
    const Vec scale =
        (atol + rtol * y.cwiseAbs().cwiseMax(out.y1.cwiseAbs()).array()).matrix();
    out.error = err.cwiseAbs().cwiseQuotient(scale).maxCoeff();
    return out;
  }

  static constexpr int rhs_per_step = 6;
};

/// Proportional-integral step-size controller for an order-5 pair.
class StepController {
 public:
  /// Returns the factor by which to scale h after a step with normalized
  /// error `error`.
  double factor(double error, bool accepted) {
    constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0, safety = 0.9;
    constexpr double min_factor = 0.2, max_factor = 5.0;
    if (error == 0.0) return max_factor;
    double f = safety * std::pow(error, -alpha);
    if (accepted) {
      f *= std::pow(previous_error_, beta);
      previous_error_ = std::max(error, 1e-4);
    }
    f = std::clamp(f, min_factor, accepted ? max_factor : 1.0);
    if (!accepted && rejected_last_) f = std::min(f, 0.5);
    rejected_last_ = !accepted;
    return f;
  }

 private:
  double previous_error_ = 1e-4;
  bool rejected_last_ = false;
};

/// Initial step guess from the size of the state and its derivative.
template <int Dim>
double initial_step(const StateVector<Dim>& y, const StateVector<Dim>& f, double rtol, double atol,
                    double span) {
  const StateVector<Dim> scale = (atol + rtol * y.cwiseAbs().array()).matrix();
  const double d0 = y.cwiseQuotient(scale).cwiseAbs().maxCoeff();
  const double d1 = f.cwiseQuotient(scale).cwiseAbs().maxCoeff();
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  return std::min({h, std::abs(span), 0.1 * std::abs(span) + 1e-300});
}

/// Adaptive integration of y' = rhs(t, y) from t0 to t_end. `on_step` sees
/// every accepted StepSegment and returns false to stop early. `limit_step`
/// may shorten a proposed step (used to stop exactly on output times).
template <int Dim, typename Rhs, typename OnStep>
StepStats integrate_adaptive(Rhs&& rhs, double t0, StateVector<Dim> y, double t_end,
                             const IntegratorConfig& cfg, OnStep&& on_step) {
  using Stepper = DormandPrince45<Dim>;
  StepStats stats;
  StepController controller;
  double t = t0;
  StateVector<Dim> f = rhs(t, y);
  ++stats.rhs_evaluations;
  const double span = t_end - t0;
  if (span <= 0.0) return stats;
  const double h_min = 1e-14 * std::max(std::abs(t_end), 1.0);
  double h = std::min(initial_step<Dim>(y, f, cfg.rtol, cfg.atol, span), cfg.max_step);

  while (t < t_end) {
    if (t + h > t_end || t_end - (t + h) < h_min) h = t_end - t;
    auto trial = Stepper::step(rhs, t, y, f, h, cfg.rtol, cfg.atol);
    stats.rhs_evaluations += Stepper::rhs_per_step;
    if (!std::isfinite(trial.error)) trial.error = 1e10;
    if (trial.error <= 1.0) {
      const double t1 = (h == t_end - t) ? t_end : t + h;
      StepSegment<Dim> seg{t, t1, y, f, trial.y1, trial.f1};
      ++stats.accepted;
      t = t1;
      y = trial.y1;
      f = trial.f1;
      if (!on_step(seg)) break;
      h = std::min(h * controller.factor(trial.error, true), cfg.max_step);
    } else {
      ++stats.rejected;
      h *= controller.factor(trial.error, false);
      if (h < h_min) throw StepSizeUnderflow(t);
    }
  }
  return stats;
}

}  // namespace hysteresis
