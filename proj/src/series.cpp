#include "hysteresis/series.hpp"

#include <cmath>
#include <numbers>

#include "hysteresis/linear.hpp"

namespace hysteresis {

namespace {

FourierAttractor make_attractor(const BishopParams& params, const ForcingSpec& forcing,
                                double epsilon, std::size_t terms, HarmonicRule rule) {
  if (terms < 1) throw DomainError("series needs at least one term");
  if (!(forcing.omega > 0.0)) throw DomainError("forcing omega must be positive");
  FourierAttractor a;
  a.rule = rule;
  a.omega = forcing.omega;
  a.epsilon = epsilon / params.mass;
  a.omega1_sq = params.complex_stiffness();
  a.forcing = forcing.amplitude / params.mass;
  a.coefficients = rule == HarmonicRule::Quadratic
                       ? quadratic_coefficients<double>(a.omega1_sq, a.forcing, a.omega, terms)
                       : cubic_coefficients<double>(a.omega1_sq, a.forcing, a.omega, terms);
  a.model.variant = rule == HarmonicRule::Quadratic ? Variant::BishopQuadratic : Variant::BishopCubic;
  BishopParams p = params;
  p.epsilon = epsilon;
  p.nonlinearity = rule == HarmonicRule::Quadratic ? Nonlinearity::Quadratic : Nonlinearity::Cubic;
  a.model.params = p;
  a.model.forcing = ForcingSpec{forcing.amplitude, forcing.omega, Waveform::ComplexExponential};
  return a;
}

}  // namespace

double FourierAttractor::period() const { return 2.0 * std::numbers::pi / omega; }

FourierAttractor coefficients_quadratic(const BishopParams& params, const ForcingSpec& forcing,
                                        double epsilon, std::size_t terms) {
  return make_attractor(params, forcing, epsilon, terms, HarmonicRule::Quadratic);
}

FourierAttractor coefficients_cubic(const BishopParams& params, const ForcingSpec& forcing,
                                    double epsilon, std::size_t terms) {
  return make_attractor(params, forcing, epsilon, terms, HarmonicRule::Cubic);
}

FourierAttractor build_attractor(const ModelSpec& spec, std::size_t terms) {
  const BishopParams& p = spec.bishop();
  if (!spec.forcing) throw ModelError("periodic attractor requires forcing");
  switch (spec.variant) {
    case Variant::BishopQuadratic:
      return coefficients_quadratic(p, *spec.forcing, p.epsilon, terms);
    case Variant::BishopCubic:
      return coefficients_cubic(p, *spec.forcing, p.epsilon, terms);
    default:
      throw ModelError("Fourier attractor needs bishop-quadratic or bishop-cubic");
  }
}

SeriesState evaluate(const FourierAttractor& attractor, double t) {
  CompensatedSum<Complex> x, v, a;
  double weight = 1.0;
  for (std::size_t k = 0; k < attractor.size(); ++k) {
    if (weight == 0.0) break;
    const double w = attractor.harmonic(k) * attractor.omega;
    const Complex term = weight * attractor.coefficients[k] * std::polar(1.0, w * t);
    x.add(term);
    v.add(Complex(0.0, w) * term);
    a.add(-(w * w) * term);
    weight *= attractor.epsilon;
  }
  return {x.value(), v.value(), a.value()};
}

Complex residual_q(const FourierAttractor& attractor, double t) {
  const SeriesState s = evaluate(attractor, t);
  const Complex power = attractor.rule == HarmonicRule::Quadratic ? s.x * s.x : s.x * s.x * s.x;
  return s.a + attractor.omega1_sq * s.x + attractor.epsilon * power -
         attractor.forcing * std::polar(1.0, attractor.omega * t);
}

double max_residual(const FourierAttractor& attractor, double t0, double t1, std::size_t samples) {
  double worst = 0.0;
  const double step = samples > 1 ? (t1 - t0) / static_cast<double>(samples - 1) : 0.0;
  for (std::size_t i = 0; i < samples; ++i)
    worst = std::max(worst, std::abs(residual_q(attractor, t0 + step * static_cast<double>(i))));
  return worst;
}

ConvergenceReport convergence_report(const FourierAttractor& attractor) {
  const std::size_t n = attractor.size();
  if (n < 32) throw DomainError("convergence_report needs at least 32 terms");
  ConvergenceReport report;
  report.magnitudes.reserve(n);
  for (const Complex& b : attractor.coefficients) report.magnitudes.push_back(std::abs(b));

  const std::size_t half = n / 2;
  double weight = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double term = weight * report.magnitudes[k];
    (k < half ? report.head_sum : report.tail_bound) += term;
    weight *= attractor.epsilon;
  }

  // Least squares of log|B_k| on log k over the nonzero upper-half entries.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = half; k < n; ++k) {
    if (report.magnitudes[k] == 0.0 || k == 0) continue;
    const double lx = std::log(static_cast<double>(k));
    const double ly = std::log(report.magnitudes[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count >= 2) {
    const double m = static_cast<double>(count);
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }

  // At eps = 0 every weighted term past B_0 vanishes: no tail to fit.
  if (attractor.epsilon == 0.0) {
    report.slope.reset();
    report.accepted = std::isfinite(report.head_sum);
    return report;
  }
  const bool tail_ok = report.tail_bound <= 1e-10 * report.head_sum;
  report.accepted = tail_ok && (!report.slope || *report.slope < -1.0);
  return report;
}

TransientCoefficients quadratic_transient_coefficients(const BishopParams& params, Complex forcing,
                                                       double omega, double alpha) {
  const FreeSolution free = FreeSolution::from_amplitude_phase(params, alpha, 0.0);
  const Complex g = free.rate();
  const Complex omega1_sq = params.complex_stiffness();
  const Complex B0 = particular_coefficient(params, forcing, omega);
  const Complex shifted = g + Complex(0.0, omega);
  TransientCoefficients out;
  out.lambda1 = -(alpha * alpha) / (4.0 * g * g + omega1_sq);
  out.lambda2 = -2.0 * alpha * B0 / (shifted * shifted + omega1_sq);
  return out;
}

nlohmann::json to_json(const FourierAttractor& attractor) {
  nlohmann::json coefficients = nlohmann::json::array();
  for (const Complex& b : attractor.coefficients) coefficients.push_back({b.real(), b.imag()});
  return {{"rule", attractor.rule == HarmonicRule::Quadratic ? "quadratic" : "cubic"},
          {"omega", attractor.omega},
          {"epsilon", attractor.epsilon},
          {"B", coefficients}};
}

FourierAttractor attractor_from_json(const nlohmann::json& j) {
  FourierAttractor a;
  const std::string rule = j.at("rule").get<std::string>();
  if (rule == "quadratic")
    a.rule = HarmonicRule::Quadratic;
  else if (rule == "cubic")
    a.rule = HarmonicRule::Cubic;
  else
    throw ModelError("unknown harmonic rule '" + rule + "'");
  a.omega = j.at("omega").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  for (const auto& pair : j.at("B")) a.coefficients.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  return a;
}

}  // namespace hysteresis
