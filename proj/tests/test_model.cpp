#include <random>

#include <gtest/gtest.h>

#include "hysteresis/model.hpp"

using namespace hysteresis;

namespace {

ForcingSpec forcing(Complex F, double omega) { return {F, omega, Waveform::ComplexExponential}; }

}  // namespace

TEST(BishopRhs, UndampedRestoringForce) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.0);
  const Complex a = rhs_bishop(spec, 0.0, {1.0, 0.0}, {0.3, -2.0});
  EXPECT_DOUBLE_EQ(a.real(), -1.0);
  EXPECT_DOUBLE_EQ(a.imag(), 0.0);
}

TEST(BishopRhs, QuadraticSubstitution) {
  const auto spec = make_bishop(Variant::BishopQuadratic, 1.0, 0.05, 0.1);
  const Complex a = rhs_bishop(spec, 0.0, {1.0, 0.0}, {});
  EXPECT_NEAR(a.real(), -1.1, 1e-15);
  EXPECT_NEAR(a.imag(), -0.05, 1e-15);
}

TEST(BishopRhs, ForcingOnly) {
  const auto spec = make_bishop(Variant::BishopCubic, 1.0, 0.0, 0.0, forcing({1.0, 0.0}, 0.7));
  const Complex a = rhs_bishop(spec, 0.0, {}, {});
  EXPECT_DOUBLE_EQ(a.real(), 1.0);
  EXPECT_DOUBLE_EQ(a.imag(), 0.0);
}

TEST(BishopRhs, LinearInStateWithoutForcing) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto spec = make_bishop(Variant::BishopLinear, 1.3, 0.2);
  for (int trial = 0; trial < 50; ++trial) {
    const Complex a(u(rng), u(rng)), b(u(rng), u(rng));
    const Complex x1(u(rng), u(rng)), x2(u(rng), u(rng));
    const Complex lhs = rhs_bishop(spec, 0.4, a * x1 + b * x2, {});
    const Complex rhs = a * rhs_bishop(spec, 0.4, x1, {}) + b * rhs_bishop(spec, 0.4, x2, {});
    EXPECT_LT(std::abs(lhs - rhs), 1e-13);
  }
}

TEST(BishopRhs, RejectsReidSpec) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 1.0);
  EXPECT_THROW(rhs_bishop(spec, 0.0, {}, {}), ModelError);
}

TEST(ReidRhs, SignOfProduct) {
  const auto spec = make_reid(Variant::ReidLinear, 0.2, 1.0);
  EXPECT_NEAR(rhs_reid(spec, 0.0, 1.0, 1.0), -1.2, 1e-15);
  EXPECT_NEAR(rhs_reid(spec, 0.0, 1.0, -1.0), -0.8, 1e-15);
  EXPECT_EQ(rhs_reid(spec, 0.0, 0.0, 0.0), 0.0);
  // sgn(0) = 0 at a reversal point
  EXPECT_NEAR(rhs_reid(spec, 0.0, 1.0, 0.0), -1.0, 1e-15);
}

TEST(ReidRhs, NoDampingIsHarmonic) {
  const auto spec = make_reid(Variant::ReidLinear, 0.0, 0.7);
  for (double x : {-2.0, -0.1, 0.0, 0.5, 3.0})
    for (double v : {-1.0, 0.0, 2.0}) EXPECT_DOUBLE_EQ(rhs_reid(spec, 1.0, x, v), -0.7 * x);
}

TEST(ReidRhs, DampingTermSign) {
  const auto free = make_reid(Variant::ReidLinear, 0.0, 1.0);
  const auto damped = make_reid(Variant::ReidLinear, 0.3, 1.0);
  for (double x : {-1.5, 0.4})
    for (double v : {-0.7, 0.9}) {
      // the extra restoring force is (free - damped) = c x sgn(x v)
      const double extra = rhs_reid(free, 0.0, x, v) - rhs_reid(damped, 0.0, x, v);
      if (x * v > 0)
        EXPECT_GT(extra * x, 0.0);
      else
        EXPECT_LT(extra * x, 0.0);
    }
}

TEST(ReidRhs, RejectsBishopSpec) {
  const auto spec = make_bishop(Variant::BishopLinear, 1.0, 0.1);
  EXPECT_THROW(rhs_reid(spec, 0.0, 1.0, 1.0), ModelError);
}

TEST(ModelJson, RoundTrip) {
  const auto spec = make_bishop(Variant::BishopCubic, 1.5, 0.2, 0.05, forcing({0.8, 0.1}, 0.7), 2.0);
  const ModelSpec back = model_from_json(to_json(spec));
  EXPECT_EQ(back.variant, Variant::BishopCubic);
  EXPECT_DOUBLE_EQ(back.bishop().stiffness, 1.5);
  EXPECT_DOUBLE_EQ(back.bishop().hysteretic, 0.2);
  EXPECT_DOUBLE_EQ(back.bishop().epsilon, 0.05);
  EXPECT_DOUBLE_EQ(back.bishop().mass, 2.0);
  EXPECT_EQ(back.forcing_amplitude(), Complex(0.8, 0.1));
  EXPECT_DOUBLE_EQ(back.forcing_omega(), 0.7);
}

TEST(ModelJson, MissingEpsilonAndGDefaultToZero) {
  const auto j = nlohmann::json::parse(
      R"({"variant": "bishop-quadratic", "k": 1, "h": 0.05, "forcing": {"f": 1, "omega": 0.75}})");
  const ModelSpec spec = model_from_json(j);
  EXPECT_EQ(spec.bishop().epsilon, 0.0);
  EXPECT_EQ(spec.forcing_amplitude(), Complex(1.0, 0.0));
}

TEST(ModelJson, ReidFields) {
  const auto j = nlohmann::json::parse(
      R"({"variant": "reid-cubic", "c": 0.01, "k": 0.3, "epsilon": 0.1, "forcing": {"f": 1.1, "omega": 1.3}})");
  const ModelSpec spec = model_from_json(j);
  EXPECT_DOUBLE_EQ(spec.reid().damping, 0.01);
  EXPECT_DOUBLE_EQ(spec.reid().stiffness, 0.3);
  EXPECT_EQ(spec.forcing->waveform, Waveform::Sine);
}

TEST(ModelJson, BadInput) {
  EXPECT_THROW(model_from_json(nlohmann::json::array()), ModelError);
  EXPECT_THROW(model_from_json({{"variant", "viscous"}}), ModelError);
  EXPECT_THROW(model_from_json({{"variant", "bishop-linear"}, {"k", "one"}}), ModelError);
  EXPECT_THROW(model_from_json({{"variant", "bishop-linear"}, {"forcing", {{"f", 1.0}}}}), ModelError);
}
