#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hysteresis/linear.hpp"
#include "hysteresis/response.hpp"
#include "hysteresis/series.hpp"

using namespace hysteresis;

namespace {

ModelSpec quadratic(double mu, double eps) {
  return make_bishop(Variant::BishopQuadratic, 1.0, mu, eps, ForcingSpec{{1.0, 0.0}, 1.0});
}

SweepConfig sweep(int samples) {
  SweepConfig cfg;
  cfg.samples = samples;
  return cfg;
}

}  // namespace

TEST(LogGrid, Endpoints) {
  const auto g = log_grid(0.05, 3.0, 400);
  ASSERT_EQ(g.size(), 400u);
  EXPECT_DOUBLE_EQ(g.front(), 0.05);
  EXPECT_DOUBLE_EQ(g.back(), 3.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

TEST(Sweep, LinearLimitMatchesClosedForm) {
  for (Variant v : {Variant::BishopLinear, Variant::BishopQuadratic, Variant::BishopCubic}) {
    const auto spec = make_bishop(v, 1.0, 0.2, 0.0, ForcingSpec{{1.0, 0.0}, 1.0});
    const auto points = response_sweep(spec, sweep(60));
    for (const auto& p : points) {
      const auto lin = linear_response(0.2, p.ratio);
      EXPECT_NEAR(p.magnification, lin.magnification, 1e-10) << p.ratio;
      EXPECT_NEAR(p.phase, lin.phase, 1e-10) << p.ratio;
      EXPECT_FALSE(p.flagged);
    }
  }
}

TEST(Sweep, SeriesAgreesWithIntegration) {
  SweepConfig series = sweep(1);
  series.method = ResponseMethod::FourierSeries;
  SweepConfig numeric = series;
  numeric.method = ResponseMethod::TimeIntegration;
  const auto spec = quadratic(0.05, 0.1);
  int compared = 0;
  for (double w : {0.7, 0.9, 1.2, 1.6, 2.5}) {
    const auto a = response_point(spec, w, series);
    if (a.flagged) continue;
    const auto b = response_point(spec, w, numeric);
    if (!std::isfinite(b.magnification)) continue;
    EXPECT_NEAR(a.magnification, b.magnification, 0.02 * a.magnification) << w;
    ++compared;
  }
  EXPECT_GE(compared, 3);
}

TEST(Sweep, PhaseContinuousForLargeDamping) {
  for (double mu : {0.2, 0.5}) {
    const auto points = response_sweep(quadratic(mu, 0.05), sweep(200));
    for (std::size_t i = 1; i < points.size(); ++i)
      EXPECT_LT(std::abs(points[i].phase - points[i - 1].phase), 0.5) << points[i].ratio;
  }
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  SweepConfig one = sweep(40), four = sweep(40);
  four.threads = 4;
  const auto spec = quadratic(0.05, 0.1);
  EXPECT_EQ(response_csv(response_sweep(spec, one)), response_csv(response_sweep(spec, four)));
}

TEST(Sweep, CsvHeader) {
  const auto csv = response_csv(response_sweep(quadratic(0.1, 0.0), sweep(3)));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "omega,r,n,eta,n_fundamental,source");
}

TEST(ReidCycle, WorkScalesWithSquaredAmplitude) {
  SweepConfig cfg;
  cfg.samples_per_period = 4096;
  std::vector<double> ratios;
  for (double w : {0.5, 1.0, 1.5}) {
    const auto first = reid_steady_cycle(make_reid(Variant::ReidLinear, 0.2, 1.0, 0.0, 1.0, w), cfg);
    for (double A : {0.5, 2.0}) {
      // the model is positively homogeneous, so amplitude scales with f
      const double f = A / first.amplitude;
      const auto cyc = reid_steady_cycle(make_reid(Variant::ReidLinear, 0.2, 1.0, 0.0, f, w), cfg);
      EXPECT_NEAR(cyc.amplitude, A, 1e-6 * A);
      ratios.push_back(cyc.work / (0.2 * cyc.amplitude * cyc.amplitude));
    }
  }
  for (double r : ratios) EXPECT_NEAR(r, ratios.front(), 0.05 * ratios.front());
}

TEST(ReidSweep, CubicPeakMovesUp) {
  auto peak = [](double eps) {
    const auto spec = make_reid(Variant::ReidCubic, 0.2, 1.0, eps, 1.0, 1.0);
    SweepConfig cfg = sweep(60);
    cfg.r_lo = 0.5;
    cfg.r_hi = 2.0;
    cfg.reid_transient_periods = 60;
    double best = 0, at = 0;
    for (const auto& p : response_sweep(spec, cfg))
      if (p.magnification > best) best = p.magnification, at = p.omega;
    return at;
  };
  EXPECT_GT(peak(0.1), peak(0.0));
}

TEST(Escape, BracketHolds) {
  EscapeSearchConfig cfg;
  const auto r = critical_amplitude(0.2, 0.8, 0.1, cfg);
  EXPECT_LE(r.bracket, cfg.tolerance);
  EXPECT_LT(r.bounded_at, r.escaped_at);
  EXPECT_EQ(escape_probe(0.2, 0.8, 0.1, r.bounded_at, cfg).verdict, ProbeVerdict::Bounded);
  EXPECT_EQ(escape_probe(0.2, 0.8, 0.1, r.escaped_at, cfg).verdict, ProbeVerdict::Escaped);
  EXPECT_EQ(r.initial_condition, "periodic attractor");
}

TEST(Escape, NonincreasingInEpsilon) {
  double last = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.2, 0.3}) {
    const double fc = critical_amplitude(eps, 0.8, 0.1).critical;
    EXPECT_LE(fc, last);
    last = fc;
  }
}

TEST(Escape, WeakNonlinearityHasNoBracket) {
  EXPECT_THROW(critical_amplitude(0.001, 0.8, 0.1), BracketNotFound);
}

TEST(Escape, CsvHeader) {
  EXPECT_EQ(escape_csv({}), "epsilon,omega,mu,F_c,bracket\n");
}
