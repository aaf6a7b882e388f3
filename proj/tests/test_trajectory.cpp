#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hysteresis/basin.hpp"
#include "hysteresis/linear.hpp"
#include "hysteresis/trajectory.hpp"

using namespace hysteresis;

namespace {

IntegratorConfig config(double t_end, double dt = 0.1, double rtol = 1e-9, double atol = 1e-12) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.output_step = dt;
  cfg.rtol = rtol;
  cfg.atol = atol;
  return cfg;
}

Complex x_of(const BishopTrajectory& traj, std::size_t i) {
  return {traj.states[i][0], traj.states[i][1]};
}

double energy(double k, double x, double v) { return 0.5 * (v * v + k * x * x); }

}  // namespace

TEST(Integrator, ConfigValidation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rtol = 0.0;
  EXPECT_ANY_THROW(cfg.validate());
  cfg = {};
  cfg.output_step = -1.0;
  EXPECT_ANY_THROW(cfg.validate());
}

TEST(Integrator, UniformGrid) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.02);
  const auto traj = integrate(spec, BishopState{{0.5, 0.0}, {0.0, 0.5}}, config(10.05, 0.1));
  ASSERT_GE(traj.size(), 2u);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) EXPECT_NEAR(traj.times[i], 0.1 * i, 1e-12);
  EXPECT_DOUBLE_EQ(traj.times.back(), 10.05);
  EXPECT_EQ(traj.status, TrajectoryStatus::Completed);
}

TEST(Integrator, FreeSolutionAgreement) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.02);
  const auto sol = FreeSolution::from_amplitude_phase(spec.bishop(), 0.5, 0.3);
  const auto traj = integrate(spec, sol.state(0.0), config(300.0, 0.5, 1e-10, 1e-13));
  for (std::size_t i = 0; i < traj.size(); ++i)
    ASSERT_LT(std::abs(x_of(traj, i) - sol.state(traj.times[i]).x), 1e-6) << traj.times[i];
}

TEST(Integrator, ForcedSolutionAgreement) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.05, 0.0, ForcingSpec{{0.5, 0.5}, 0.5});
  const auto sol = ForcedSolution::from_amplitude_phase(spec.bishop(), {0.5, 0.5}, 0.5, 10.5, 0.3);
  const auto traj = integrate(spec, sol.state(0.0), config(500.0, 0.5, 1e-11, 1e-14));
  for (std::size_t i = 0; i < traj.size(); ++i)
    ASSERT_LT(std::abs(x_of(traj, i) - sol.state(traj.times[i]).x), 1e-6) << traj.times[i];
}

TEST(Integrator, TighterToleranceNoWorse) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.5);
  const auto sol = FreeSolution::from_amplitude_phase(spec.bishop(), 0.5, 0.3);
  auto worst = [&](double rtol, double atol) {
    const auto traj = integrate(spec, sol.state(0.0), config(40.0, 0.1, rtol, atol));
    double e = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
      e = std::max(e, std::abs(x_of(traj, i) - sol.state(traj.times[i]).x));
    return e;
  };
  double last = worst(1e-6, 1e-9);
  for (double rtol : {5e-7, 2.5e-7, 1.25e-7}) {
    const double e = worst(rtol, rtol * 1e-3);
    EXPECT_LE(e, last * 1.05);
    last = e;
  }
}

TEST(Integrator, Superposition) {
  const BishopState s0{{0.5, 0.1}, {0.2, 0.4}};
  const ForcingSpec f{{0.5, 0.5}, 0.5};
  const auto forced = make_bishop(Variant::BishopLinear, 1.0, 0.05, 0.0, f);
  const auto free = make_bishop(Variant::BishopLinear, 1.0, 0.05);
  const auto cfg = config(200.0, 1.0, 1e-11, 1e-14);
  const auto a = integrate(forced, s0, cfg);
  const auto b = integrate(free, s0, cfg);
  // the difference solves the forced problem from rest:
  // B e^{iwt} + c1 e^{s t} + c2 e^{-s t}, s^2 = -(k + ih), both free modes present
  const Complex W = forced.bishop().complex_stiffness();
  const Complex s = Complex(0.0, 1.0) * std::sqrt(W);
  const Complex B = f.amplitude / (W - f.omega * f.omega);
  // c1 + c2 = -B, s (c1 - c2) = -i w B
  const Complex c1 = 0.5 * (-B - Complex(0.0, f.omega) * B / s);
  const Complex c2 = -B - c1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.times[i];
    const Complex exact = B * std::polar(1.0, f.omega * t) + c1 * std::exp(s * t) + c2 * std::exp(-s * t);
    EXPECT_LT(std::abs(x_of(a, i) - x_of(b, i) - exact), 1e-7 * std::max(1.0, std::abs(exact))) << t;
  }
}

TEST(Integrator, Deterministic) {
  const auto spec = make_bishop(Variant::BishopQuadratic, 1.0, 0.05, 0.1, ForcingSpec{{1.0, 0.0}, 0.75});
  const auto a = integrate(spec, BishopState{{0.3, 0.0}, {0.0, 0.0}}, config(50.0));
  const auto b = integrate(spec, BishopState{{0.3, 0.0}, {0.0, 0.0}}, config(50.0));
  EXPECT_EQ(trajectory_csv(a), trajectory_csv(b));
}

TEST(Integrator, ZeroStateStaysZero) {
  const auto spec = make_reid(Variant::ReidCubic, 0.01, 0.3, 0.1);
  const auto traj = integrate_reid(spec, {0.0, 0.0}, config(50.0));
  for (const auto& s : traj.states) EXPECT_EQ(s.norm(), 0.0);
  const auto bspec = make_bishop(Variant::BishopCubic, 1.0, 0.1, 0.1);
  const auto btraj = integrate(bspec, BishopState{}, config(50.0));
  for (const auto& s : btraj.states) EXPECT_EQ(s.norm(), 0.0);
}

TEST(Integrator, BlowUpStatus) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.5);
  const auto sol = FreeSolution::from_amplitude_phase(spec.bishop(), 0.5, 0.3);
  const auto traj = integrate(spec, sol.state(0.0), config(1000.0));
  ASSERT_EQ(traj.status, TrajectoryStatus::BlewUp);
  ASSERT_TRUE(traj.blowup_time.has_value());
  EXPECT_EQ(*traj.blowup_time, traj.times.back());
  EXPECT_GE(std::abs(x_of(traj, traj.size() - 1)), 1e6);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) EXPECT_LT(std::abs(x_of(traj, i)), 1e6);
}

TEST(BlowupTime, HighDampingNearHundred) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.5);
  const auto sol = FreeSolution::from_amplitude_phase(spec.bishop(), 0.5, 0.3);
  const auto td = measure_blowup_time(spec, sol.state(0.0), config(1000.0));
  ASSERT_TRUE(td.has_value());
  // threshold 1 on |error|; the divergence is visible somewhat earlier
  EXPECT_GT(*td, 50.0);
  EXPECT_LT(*td, 200.0);
}

TEST(BlowupTime, UndampedNever) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.0, 0.0, ForcingSpec{{0.5, 0.5}, 0.5});
  const auto sol = ForcedSolution::from_amplitude_phase(spec.bishop(), {0.5, 0.5}, 0.5, 10.5, 0.3);
  EXPECT_FALSE(measure_blowup_time(spec, sol.state(0.0), config(5000.0)).has_value());
}

TEST(Reid, FreeEnergyNonincreasing) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 1.0);
  const auto traj = integrate_reid(spec, {1.0, 0.5}, config(100.0, 0.05));
  double last = std::numeric_limits<double>::infinity();
  for (const auto& s : traj.states) {
    const double e = energy(1.0, s[0], s[1]);
    EXPECT_LE(e, last * (1 + 1e-9));
    last = e;
  }
}

TEST(Reid, PeaksDecrease) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 1.0);
  const auto traj = integrate_reid(spec, {1.0, 0.0}, config(60.0, 0.01));
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < traj.size(); ++i)
    if (traj.states[i][0] > traj.states[i - 1][0] && traj.states[i][0] >= traj.states[i + 1][0])
      peaks.push_back(traj.states[i][0]);
  ASSERT_GE(peaks.size(), 5u);
  for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_LT(peaks[i], peaks[i - 1]);
}

TEST(Reid, WorkEqualsEnergyDrop) {
  const double c = 0.2, k = 1.0;
  const auto spec = make_reid(Variant::ReidLinear, c, k);
  IntegratorConfig cfg = config(1.0, 1.0, 1e-12, 1e-14);
  // 5-point Gauss-Legendre on each step; steps never straddle a sign change
  const double gx[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
  const double gw[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                       0.2369268850561891};
  const double period = 2 * std::numbers::pi / std::sqrt(k);
  ReidState s{1.5, 0.0};
  for (int cycle = 0; cycle < 5; ++cycle) {
    double work = 0.0;
    StateVector<2> end;
    integrate_reid_segments(spec, s, 0.0, period, cfg, [&](const StepSegment<2>& seg) {
      const double mid = 0.5 * (seg.t0 + seg.t1), half = 0.5 * (seg.t1 - seg.t0);
      for (int q = 0; q < 5; ++q) {
        const auto y = seg.interpolate(mid + half * gx[q]);
        work += gw[q] * half * c * std::abs(y[0]) * std::abs(y[1]);
      }
      end = seg.y1;
      return true;
    });
    const double drop = energy(k, s.x, s.v) - energy(k, end[0], end[1]);
    EXPECT_NEAR(work, drop, 1e-6 * drop) << "cycle " << cycle;
    s = {end[0], end[1]};
  }
}

TEST(Reid, SmoothedAgreesWithEvents) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 0.3, 0.0, 1.0, 1.3);
  const auto cfg = config(30.0, 0.5, 1e-10, 1e-12);
  const auto exact = integrate_reid(spec, {0.5, 0.0}, cfg);
  const auto smooth = integrate_reid_smoothed(spec, {0.5, 0.0}, cfg, 1e-5);
  ASSERT_EQ(exact.size(), smooth.size());
  for (std::size_t i = 0; i < exact.size(); ++i)
    EXPECT_LT((exact.states[i] - smooth.states[i]).norm(), 1e-2);
}

TEST(Reid, LinearForcedIsPeriodOne) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 0.3, 0.0, 1.0, 1.3);
  StrobeConfig strobe;
  strobe.transient = 100;
  for (double x0 : {-2.0, 0.0, 1.5}) {
    const auto r = classify_period(spec, {x0, 0.5}, IntegratorConfig{}, strobe);
    EXPECT_EQ(r.status, PeriodStatus::Resolved);
    EXPECT_EQ(r.period_multiple, 1);
  }
}

TEST(Csv, Headers) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 1.0);
  const auto traj = integrate_reid(spec, {1.0, 0.0}, config(1.0));
  EXPECT_EQ(trajectory_csv(traj).substr(0, 6), "t,x,v\n");
  const auto b = make_bishop(Variant::BishopLinear, 1.0, 0.1);
  const auto bt = integrate(b, BishopState{{1.0, 0.0}, {}}, config(1.0));
  EXPECT_EQ(trajectory_csv(bt).substr(0, 19), "t,re_x,im_x,re_v,im");
  EXPECT_NE(trajectory_csv(bt, std::vector<double>(bt.size(), 0.0)).find("abs_err"), std::string::npos);
}
