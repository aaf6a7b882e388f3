#include "hysteresis/trajectory.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hysteresis/linear.hpp"
#include "hysteresis/series.hpp"

namespace hysteresis {

void IntegratorConfig::validate() const {
  if (!(atol > 0.0)) throw std::invalid_argument("atol must be > 0");
  if (!(rtol > 0.0 && rtol < 1.0)) throw std::invalid_argument("rtol must lie in (0, 1)");
  if (!(output_step > 0.0)) throw std::invalid_argument("output step must be > 0");
  if (!(max_step > 0.0)) throw std::invalid_argument("max step must be > 0");
  if (!(blowup_threshold > 0.0)) throw std::invalid_argument("blow-up threshold must be > 0");
  if (!std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite");
}

namespace {

double displacement_norm(const StateVector<4>& y) { return std::hypot(y[0], y[1]); }
double displacement_norm(const StateVector<2>& y) { return std::abs(y[0]); }

/// Samples segments onto the grid t0 + k * dt and watches for blow-up.
template <int Dim>
class Recorder {
 public:
  Recorder(Trajectory<Dim>& traj, double t0, const IntegratorConfig& cfg)
      : traj_(traj), t0_(t0), dt_(cfg.output_step), xmax_(cfg.blowup_threshold) {}

  bool start(const StateVector<Dim>& y0) { return push(t0_, y0); }

  bool operator()(const StepSegment<Dim>& seg) {
    for (;;) {
      const double tk = t0_ + static_cast<double>(next_) * dt_;
      if (tk > seg.t1) break;
      const StateVector<Dim> y = tk == seg.t1 ? seg.y1 : seg.interpolate(tk);
      ++next_;
      if (!push(tk, y)) return false;
    }
    if (displacement_norm(seg.y1) >= xmax_) {
      if (traj_.times.empty() || traj_.times.back() < seg.t1) traj_.times.push_back(seg.t1), traj_.states.push_back(seg.y1);
      traj_.status = TrajectoryStatus::BlewUp;
      traj_.blowup_time = seg.t1;
      return false;
    }
    last_t_ = seg.t1;
    last_y_ = seg.y1;
    return true;
  }

  void finish() {
    if (traj_.status == TrajectoryStatus::BlewUp || traj_.times.empty()) return;
    if (last_t_ > traj_.times.back()) {
      traj_.times.push_back(last_t_);
      traj_.states.push_back(last_y_);
    }
  }

 private:
  bool push(double t, const StateVector<Dim>& y) {
    traj_.times.push_back(t);
    traj_.states.push_back(y);
    if (displacement_norm(y) >= xmax_) {
      traj_.status = TrajectoryStatus::BlewUp;
      traj_.blowup_time = t;
      return false;
    }
    return true;
  }

  Trajectory<Dim>& traj_;
  double t0_;
  double dt_;
  double xmax_;
  long next_ = 1;
  double last_t_ = -std::numeric_limits<double>::infinity();
  StateVector<Dim> last_y_ = StateVector<Dim>::Zero();
};

/// Reid dynamics per unit mass with the sign of x*v frozen by the caller.
struct ReidField {
  ReidParams p;
  double f = 0.0;
  double omega = 0.0;

  explicit ReidField(const ModelSpec& spec) : p(spec.reid()) {
    if (spec.forcing) {
      f = spec.forcing->amplitude.real();
      omega = spec.forcing->omega;
    }
  }

  /// Acceleration without the damping term.
  double conservative(double t, double x) const {
    return (f * std::sin(omega * t) - p.stiffness * x - p.epsilon * x * x * x) / p.mass;
  }
  double damping(double x) const { return p.damping * std::abs(x) / p.mass; }
  double acceleration(double t, double x, int sign_xv) const {
    return conservative(t, x) - p.damping * x * sign_xv / p.mass;
  }
};

struct ReidMode {
  int sign_xv = 0;
  bool stuck = false;
};

/// Mode on the far side of a point where x or v vanishes.
ReidMode far_side_mode(const ReidField& field, double t, double x, double v) {
  if (x != 0.0 && v != 0.0) return {sgn(x) * sgn(v), false};
  if (v != 0.0) return {1, false};  // x passes through zero: moving away next
  if (x == 0.0) return {1, false};  // damping vanishes with x
  const double a = field.conservative(t, x);
  const double d = field.damping(x);
  if (a > d) return {sgn(x), false};
  if (a < -d) return {-sgn(x), false};
  return {0, true};
}

}  // namespace

StepStats integrate_bishop_segments(const ModelSpec& spec, const BishopState& initial, double t0,
                                    double t_end, const IntegratorConfig& cfg,
                                    const SegmentObserver<4>& observer) {
  cfg.validate();
  const BishopParams p = spec.bishop();
  const Complex stiffness = p.complex_stiffness();
  const double eps = p.epsilon / p.mass;
  const Complex amplitude = spec.forcing_amplitude() / p.mass;
  const double omega = spec.forcing_omega();
  const Nonlinearity kind = p.nonlinearity;
  auto rhs = [&](double t, const StateVector<4>& y) -> StateVector<4> {
    const Complex x(y[0], y[1]);
    Complex a = -stiffness * x;
    if (kind == Nonlinearity::Quadratic)
      a -= eps * x * x;
    else if (kind == Nonlinearity::Cubic)
      a -= eps * x * x * x;
    if (amplitude != Complex(0.0, 0.0)) a += amplitude * std::polar(1.0, omega * t);
    return {y[2], y[3], a.real(), a.imag()};
  };
  return integrate_adaptive<4>(rhs, t0, pack(initial), t_end, cfg, observer);
}

StepStats integrate_reid_segments(const ModelSpec& spec, const ReidState& initial, double t0,
                                  double t_end, const IntegratorConfig& cfg,
                                  const SegmentObserver<2>& observer) {
  cfg.validate();
  using Vec = StateVector<2>;
  using Stepper = DormandPrince45<2>;
  const ReidField field(spec);
  StepStats stats;
  if (!(t_end > t0)) return stats;

  double t = t0;
  Vec y = pack(initial);
  ReidMode mode = far_side_mode(field, t, y[0], y[1]);
  auto rhs = [&](double tt, const Vec& s) -> Vec {
    if (mode.stuck) return Vec::Zero();
    return {s[1], field.acceleration(tt, s[0], mode.sign_xv)};
  };
  Vec f = rhs(t, y);
  ++stats.rhs_evaluations;

  StepController controller;
  const double h_min = 1e-14 * std::max(std::abs(t_end), 1.0);
  const double period = field.omega > 0.0 ? 2.0 * std::numbers::pi / field.omega : t_end - t0;
  double h = std::min(initial_step<2>(y, f, cfg.rtol, cfg.atol, t_end - t0), cfg.max_step);

  while (t < t_end) {
    if (mode.stuck) {
      // x is held while |conservative force| <= damping force; find release.
      const double d = field.damping(y[0]);
      auto released = [&](double tt) { return std::abs(field.conservative(tt, y[0])) > d; };
      double t_release = t_end;
      const double scan = period / 256.0;
      double lo = t;
      for (double hi = std::min(t + scan, t_end);; hi = std::min(hi + scan, t_end)) {
        if (released(hi)) {
          for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (released(mid) ? hi : lo) = mid;
          }
          t_release = hi;
          break;
        }
        if (hi >= t_end) break;
        lo = hi;
      }
      const StepSegment<2> seg{t, t_release, y, Vec::Zero(), y, Vec::Zero()};
      ++stats.accepted;
      ++stats.events;
      t = t_release;
      if (!observer(seg)) break;
      if (t >= t_end) break;
      mode = far_side_mode(field, t, y[0], 0.0);
      if (mode.stuck) mode = {-sgn(field.conservative(t, y[0])) * sgn(y[0]) * -1, false};
      f = rhs(t, y);
      ++stats.rhs_evaluations;
      continue;
    }

    if (t + h > t_end || t_end - (t + h) < h_min) h = t_end - t;
    auto trial = Stepper::step(rhs, t, y, f, h, cfg.rtol, cfg.atol);
    stats.rhs_evaluations += Stepper::rhs_per_step;
    if (!std::isfinite(trial.error)) trial.error = 1e10;
    if (trial.error > 1.0) {
      ++stats.rejected;
      h *= controller.factor(trial.error, false);
      if (h < h_min) throw StepSizeUnderflow(t);
      continue;
    }

    auto crosses = [&](int i, const Vec& end) {
      return y[i] != 0.0 && sgn(end[i]) != sgn(y[i]);
    };
    const bool cross_x = crosses(0, trial.y1);
    const bool cross_v = crosses(1, trial.y1);

    if (!cross_x && !cross_v) {
      const double t1 = (h == t_end - t) ? t_end : t + h;
      const StepSegment<2> seg{t, t1, y, f, trial.y1, trial.f1};
      ++stats.accepted;
      t = t1;
      const bool had_zero = y[0] == 0.0 || y[1] == 0.0;
      y = trial.y1;
      f = trial.f1;
      if (!observer(seg)) break;
      if (had_zero && y[0] != 0.0 && y[1] != 0.0) {
        const int updated = sgn(y[0]) * sgn(y[1]);
        if (updated != mode.sign_xv) {
          mode.sign_xv = updated;
          f = rhs(t, y);
          ++stats.rhs_evaluations;
        }
      }
      h = std::min(h * controller.factor(trial.error, true), cfg.max_step);
      continue;
    }

    // Locate the earliest zero of a crossing component with a bracketing
    // (Illinois-modified regula falsi) search over sub-step fractions.
    auto locate = [&](int i, double& theta_out, Vec& y_out) {
      double a = 0.0, fa = y[i];
      double b = 1.0, fb = trial.y1[i];
      Vec yb = trial.y1;
      int side = 0;
      for (int it = 0; it < 200; ++it) {
        if (std::abs(fb) <= cfg.atol) break;
        if ((b - a) * h <= 1e-15 * std::max(1.0, std::abs(t))) break;
        double theta = (a * fb - b * fa) / (fb - fa);
        if (!(theta > a && theta < b)) theta = 0.5 * (a + b);
        const Vec ym = Stepper::step(rhs, t, y, f, theta * h, cfg.rtol, cfg.atol).y1;
        stats.rhs_evaluations += Stepper::rhs_per_step;
        const double fm = ym[i];
        if (sgn(fm) == sgn(fa) && fm != 0.0) {
          a = theta;
          fa = fm;
          if (side == -1) fb *= 0.5;
          side = -1;
        } else {
          b = theta;
          fb = fm;
          yb = ym;
          if (side == +1) fa *= 0.5;
          side = +1;
        }
      }
      theta_out = b;
      y_out = yb;
    };

    double theta = 2.0;
    Vec y_event;
    int component = -1;
    for (int i : {0, 1}) {
      if (!(i == 0 ? cross_x : cross_v)) continue;
      double th;
      Vec ye;
      locate(i, th, ye);
      if (th < theta) {
        theta = th;
        y_event = ye;
        component = i;
      }
    }
    y_event[component] = 0.0;
    for (int i : {0, 1})
      if (std::abs(y_event[i]) <= cfg.atol && sgn(y_event[i]) != sgn(y[i])) y_event[i] = 0.0;

    const double t1 = t + theta * h;
    const Vec f_before = rhs(t1, y_event);
    ++stats.rhs_evaluations;
    const StepSegment<2> seg{t, t1, y, f, y_event, f_before};
    ++stats.accepted;
    ++stats.events;
    t = t1;
    y = y_event;
    if (!observer(seg)) break;
    mode = far_side_mode(field, t, y[0], y[1]);
    f = rhs(t, y);
    ++stats.rhs_evaluations;
  }
  return stats;
}

BishopTrajectory integrate(const ModelSpec& spec, const BishopState& initial,
                           const IntegratorConfig& cfg) {
  BishopTrajectory traj;
  Recorder<4> recorder(traj, 0.0, cfg);
  if (!recorder.start(pack(initial))) return traj;
  traj.stats = integrate_bishop_segments(spec, initial, 0.0, cfg.t_end, cfg,
                                         [&](const StepSegment<4>& s) { return recorder(s); });
  recorder.finish();
  return traj;
}

ReidTrajectory integrate_reid(const ModelSpec& spec, const ReidState& initial,
                              const IntegratorConfig& cfg) {
  ReidTrajectory traj;
  Recorder<2> recorder(traj, 0.0, cfg);
  if (!recorder.start(pack(initial))) return traj;
  traj.stats = integrate_reid_segments(spec, initial, 0.0, cfg.t_end, cfg,
                                       [&](const StepSegment<2>& s) { return recorder(s); });
  recorder.finish();
  return traj;
}

ReidTrajectory integrate_reid_smoothed(const ModelSpec& spec, const ReidState& initial,
                                       const IntegratorConfig& cfg, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("smoothing width must be positive");
  cfg.validate();
  const ReidParams p = spec.reid();
  const std::optional<ForcingSpec> forcing = spec.forcing;
  auto rhs = [&](double t, const StateVector<2>& y) -> StateVector<2> {
    double force = -p.stiffness * y[0] - p.damping * y[0] * std::tanh(y[0] * y[1] / delta) -
                   p.epsilon * y[0] * y[0] * y[0];
    if (forcing) force += forcing->amplitude.real() * std::sin(forcing->omega * t);
    return {y[1], force / p.mass};
  };
  ReidTrajectory traj;
  Recorder<2> recorder(traj, 0.0, cfg);
  if (!recorder.start(pack(initial))) return traj;
  traj.stats = integrate_adaptive<2>(rhs, 0.0, pack(initial), cfg.t_end, cfg,
                                     [&](const StepSegment<2>& s) { return recorder(s); });
  recorder.finish();
  return traj;
}

ReidTrajectory integrate(const ModelSpec& spec, const ReidState& initial,
                         const IntegratorConfig& cfg) {
  return integrate_reid(spec, initial, cfg);
}

std::optional<double> measure_blowup_time(const ModelSpec& spec, const BishopState& initial,
                                          const IntegratorConfig& cfg) {
  const BishopParams& p = spec.bishop();
  std::function<Complex(double)> reference;
  double compare_from = 0.0;
  if (spec.variant == Variant::BishopLinear) {
    if (spec.forcing) {
      auto sol = ForcedSolution::from_initial_state(p, spec.forcing->amplitude,
                                                    spec.forcing->omega, initial.x, initial.v);
      reference = [sol](double t) { return sol.state(t).x; };
    } else {
      auto sol = FreeSolution::from_initial_state(p, initial.x, initial.v);
      reference = [sol](double t) { return sol.state(t).x; };
    }
  } else {
    auto attractor = std::make_shared<FourierAttractor>(build_attractor(spec));
    reference = [attractor](double t) { return evaluate(*attractor, t).x; };
    const double b = free_constants(p.loss_factor()).b;
    compare_from = b > 0.0 ? 20.0 / (p.natural_frequency() * b) : 0.0;
  }

  std::optional<double> result;
  long next = 0;
  auto check = [&](double t, const StateVector<4>& y) {
    if (displacement_norm(y) >= cfg.blowup_threshold) {
      result = t;
      return false;
    }
    if (t >= compare_from && std::abs(Complex(y[0], y[1]) - reference(t)) > 1.0) {
      result = t;
      return false;
    }
    return true;
  };
  if (!check(0.0, pack(initial))) return result;
  next = 1;
  integrate_bishop_segments(spec, initial, 0.0, cfg.t_end, cfg, [&](const StepSegment<4>& seg) {
    for (;;) {
      const double tk = static_cast<double>(next) * cfg.output_step;
      if (tk > seg.t1) break;
      ++next;
      if (!check(tk, tk == seg.t1 ? seg.y1 : seg.interpolate(tk))) return false;
    }
    if (displacement_norm(seg.y1) >= cfg.blowup_threshold) {
      result = seg.t1;
      return false;
    }
    return true;
  });
  return result;
}

std::string trajectory_csv(const BishopTrajectory& traj, const std::vector<double>& error) {
  std::string out = error.empty() ? "t,re_x,im_x,re_v,im_v\n" : "t,re_x,im_x,re_v,im_v,abs_err\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& y = traj.states[i];
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", traj.times[i], y[0], y[1], y[2], y[3]);
    if (!error.empty()) out += fmt::format(",{:.17g}", error.at(i));
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const ReidTrajectory& traj) {
  std::string out = "t,x,v\n";
  for (std::size_t i = 0; i < traj.size(); ++i)
    out += fmt::format("{:.17g},{:.17g},{:.17g}\n", traj.times[i], traj.states[i][0], traj.states[i][1]);
  return out;
}

}  // namespace hysteresis
