#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hysteresis/linear.hpp"

using namespace hysteresis;

namespace {

BishopParams params(double k, double h) { return {1.0, k, h, 0.0, Nonlinearity::None}; }

// central second difference of x
Complex second_derivative(const auto& sol, double t, double dt = 1e-3) {
  return (sol.state(t + dt).x - 2.0 * sol.state(t).x + sol.state(t - dt).x) / (dt * dt);
}

}  // namespace

TEST(FreeConstants, Examples) {
  const auto zero = free_constants(0.0);
  EXPECT_EQ(zero.b, 0.0);
  EXPECT_EQ(zero.c, 1.0);
  // long double, with the cancellation in sqrt(1 + mu^2) - 1 removed
  const long double mu = 0.02L;
  const long double root = std::sqrt(1.0L + mu * mu);
  const long double c = std::sqrt((root + 1.0L) / 2.0L);
  const long double b = std::sqrt(mu * mu / (root + 1.0L) / 2.0L);
  const auto bc = free_constants(0.02);
  EXPECT_NEAR(bc.c, static_cast<double>(c), 1e-15);
  EXPECT_NEAR(bc.b, static_cast<double>(b), 1e-16);
  EXPECT_NEAR(bc.b, 0.0099995, 1e-8);
  EXPECT_THROW(free_constants(-0.1), DomainError);
}

TEST(FreeConstants, IdentitiesOnGrid) {
  for (int i = 0; i <= 1000; ++i) {
    const double mu = 10.0 * i / 1000;
    const auto bc = free_constants(mu);
    EXPECT_NEAR(bc.c * bc.c - bc.b * bc.b, 1.0, 1e-12);
    EXPECT_NEAR(2 * bc.b * bc.c, mu, 1e-12);
  }
}

TEST(FreeSolution, InitialState) {
  const auto sol = FreeSolution::from_amplitude_phase(params(1.0, 0.0), 0.5, 0.3);
  const Complex x0 = sol.state(0.0).x;
  EXPECT_NEAR(std::abs(x0 - std::polar(0.5, 0.3)), 0.0, 1e-15);
}

TEST(FreeSolution, ModulusDecays) {
  const auto p = params(1.0, 0.02);
  const auto sol = FreeSolution::from_amplitude_phase(p, 0.5, 0.3);
  const double b = free_constants(0.02).b;
  double last = 1.0;
  for (double t = 0; t <= 1000; t += 10) {
    const double m = std::abs(sol.state(t).x);
    EXPECT_NEAR(m, 0.5 * std::exp(-b * t), 1e-14);
    EXPECT_LT(m, last);
    last = m;
  }
}

TEST(FreeSolution, SatisfiesEquation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  const auto p = params(1.7, 0.3);
  const auto sol = FreeSolution::from_amplitude_phase(p, 1.2, -0.4);
  for (int i = 0; i < 100; ++i) {
    const double t = u(rng);
    const Complex x = sol.state(t).x;
    EXPECT_LT(std::abs(sol.acceleration(t) + p.complex_stiffness() * x), 1e-10 * std::abs(x));
    // the analytic velocity is the derivative of x
    const Complex fd = (sol.state(t + 1e-5).x - sol.state(t - 1e-5).x) / 2e-5;
    EXPECT_LT(std::abs(fd - sol.state(t).v), 1e-8);
    EXPECT_LT(std::abs(second_derivative(sol, t) - sol.acceleration(t)), 1e-5);
  }
}

TEST(FreeSolution, FromInitialStateInverts) {
  const auto p = params(1.0, 0.1);
  const auto a = FreeSolution::from_amplitude_phase(p, 0.7, 1.1);
  const auto s = a.state(0.0);
  const auto b = FreeSolution::from_initial_state(p, s.x, s.v);
  EXPECT_NEAR(b.alpha(), 0.7, 1e-12);
  EXPECT_NEAR(b.theta(), 1.1, 1e-12);
  EXPECT_THROW(FreeSolution::from_initial_state(p, {1.0, 0.0}, {1.0, 0.0}), DomainError);
}

TEST(ForcedSolution, ParticularInvariant) {
  const auto p = params(1.0, 0.05);
  const Complex F(0.5, 0.5);
  const double w = 0.5;
  const Complex B = particular_coefficient(p, F, w);
  EXPECT_LT(std::abs(B * (-w * w + p.complex_stiffness()) - F), 1e-12);
}

TEST(ForcedSolution, PureParticularWhenAlphaZero) {
  const auto p = params(1.0, 0.05);
  const Complex F(0.5, 0.5);
  const auto sol = ForcedSolution::from_amplitude_phase(p, F, 0.5, 0.0, 0.3);
  const Complex B = particular_coefficient(p, F, 0.5);
  for (double t : {0.0, 1.0, 17.3, 400.0})
    EXPECT_LT(std::abs(sol.state(t).x - B * std::polar(1.0, 0.5 * t)), 1e-13);
}

TEST(ForcedSolution, SatisfiesEquationAndDecaysToParticular) {
  const auto p = params(1.0, 0.05);
  const Complex F(0.5, 0.5);
  const double w = 0.5;
  const auto sol = ForcedSolution::from_amplitude_phase(p, F, w, 10.5, 0.3);
  for (double t : {0.5, 3.0, 40.0, 200.0}) {
    const Complex x = sol.state(t).x;
    const Complex q = sol.acceleration(t) + p.complex_stiffness() * x - F * std::polar(1.0, w * t);
    EXPECT_LT(std::abs(q), 1e-9 * std::max(1.0, std::abs(x)));
  }
  const double late = 5000.0;
  EXPECT_LT(std::abs(sol.state(late).x - sol.particular(late).x), 1e-40);
}

TEST(ForcedSolution, UndampedResonanceRejected) {
  EXPECT_THROW(particular_coefficient(params(1.0, 0.0), {1.0, 0.0}, 1.0), ResonanceError);
}

TEST(LinearResponse, Limits) {
  const double mu = 0.3;
  const auto s = linear_response(mu, 0.0);
  EXPECT_NEAR(s.magnification, 1.0 / std::sqrt(1 + mu * mu), 1e-15);
  EXPECT_NEAR(s.phase, std::atan(mu), 1e-15);
  const auto r1 = linear_response(mu, 1.0);
  EXPECT_NEAR(r1.magnification, 1.0 / mu, 1e-12);
  EXPECT_NEAR(r1.phase, std::numbers::pi / 2, 1e-15);
  const auto big = linear_response(mu, 1e4);
  EXPECT_LT(big.magnification, 1e-7);
  EXPECT_NEAR(big.phase, std::numbers::pi, 1e-7);
  EXPECT_THROW(linear_response(0.0, 1.0), ResonanceError);
}

TEST(LinearResponse, Monotonicity) {
  for (double r = 0.05; r < 3.0; r += 0.05) {
    double last_n = std::numeric_limits<double>::infinity();
    for (double mu = 0.01; mu < 1.0; mu += 0.05) {
      const double n = linear_response(mu, r).magnification;
      EXPECT_LT(n, last_n);
      last_n = n;
    }
  }
  for (double mu : {0.05, 0.2, 1.0}) {
    double last_eta = 0.0;
    for (double r = 0.01; r < 5.0; r += 0.01) {
      const double eta = linear_response(mu, r).phase;
      EXPECT_GE(eta, last_eta);
      EXPECT_LT(eta, std::numbers::pi);
      last_eta = eta;
    }
  }
  // small mu: maximum near r = 1
  double best_r = 0, best_n = 0;
  for (double r = 0.5; r < 1.5; r += 1e-4) {
    const double n = linear_response(0.05, r).magnification;
    if (n > best_n) best_n = n, best_r = r;
  }
  EXPECT_NEAR(best_r, 1.0, 2e-3);
}
