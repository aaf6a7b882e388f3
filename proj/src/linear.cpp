#include "hysteresis/linear.hpp"

#include <cmath>

namespace hysteresis {

FreeConstants free_constants(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("free_constants: mu must be >= 0");
  // sqrt(1 + mu^2) - 1 cancels badly for small mu; use mu^2 / (sqrt(1 + mu^2) + 1).
  const double root = std::hypot(1.0, mu);
  const double b = std::sqrt(0.5 * mu * mu / (root + 1.0));
  const double c = std::sqrt(0.5 * (root + 1.0));
  return {b, c};
}

FreeSolution FreeSolution::from_amplitude_phase(const BishopParams& params, double alpha,
                                                double theta) {
  if (!(alpha >= 0.0)) throw DomainError("FreeSolution: alpha must be >= 0");
  return FreeSolution(alpha, theta, params.natural_frequency(), free_constants(params.loss_factor()));
}

FreeSolution FreeSolution::from_initial_state(const BishopParams& params, Complex x0, Complex v0) {
  const FreeSolution sol(std::abs(x0), std::arg(x0), params.natural_frequency(),
                         free_constants(params.loss_factor()));
  const Complex expected = sol.rate() * x0;
  const double scale = std::max(std::abs(expected), std::abs(v0));
  if (std::abs(expected - v0) > 1e-9 * std::max(scale, 1e-300))
    throw DomainError("initial velocity is not on the decaying branch of the free solution");
  return sol;
}

BishopState FreeSolution::state(double t) const {
  const double decay = alpha_ * std::exp(-omega1_ * constants_.b * t);
  const Complex x = std::polar(decay, omega1_ * constants_.c * t + theta_);
  return {x, rate() * x};
}

Complex FreeSolution::acceleration(double t) const {
  const Complex g = rate();
  return g * g * state(t).x;
}

Complex particular_coefficient(const BishopParams& params, Complex forcing, double omega) {
  const Complex denominator = params.complex_stiffness() - omega * omega;
  if (denominator == Complex(0.0, 0.0))
    throw ResonanceError("undamped resonance: forcing frequency equals natural frequency", 1);
  return forcing / params.mass / denominator;
}

ForcedSolution ForcedSolution::from_amplitude_phase(const BishopParams& params, Complex forcing,
                                                    double omega, double alpha, double theta) {
  if (!(omega > 0.0)) throw DomainError("ForcedSolution: omega must be positive");
  return ForcedSolution(FreeSolution::from_amplitude_phase(params, alpha, theta),
                        hysteresis::particular_coefficient(params, forcing, omega), omega);
}

ForcedSolution ForcedSolution::from_initial_state(const BishopParams& params, Complex forcing,
                                                  double omega, Complex x0, Complex v0) {
  if (!(omega > 0.0)) throw DomainError("ForcedSolution: omega must be positive");
  const Complex B = hysteresis::particular_coefficient(params, forcing, omega);
  const Complex iw(0.0, omega);
  return ForcedSolution(FreeSolution::from_initial_state(params, x0 - B, v0 - iw * B), B, omega);
}

BishopState ForcedSolution::particular(double t) const {
  const Complex y = coefficient_ * std::polar(1.0, omega_ * t);
  return {y, Complex(0.0, omega_) * y};
}

BishopState ForcedSolution::state(double t) const {
  const BishopState h = free_.state(t);
  const BishopState p = particular(t);
  return {h.x + p.x, h.v + p.v};
}

Complex ForcedSolution::acceleration(double t) const {
  return free_.acceleration(t) - omega_ * omega_ * particular(t).x;
}

LinearResponse linear_response(double mu, double ratio) {
  if (!(mu >= 0.0)) throw DomainError("linear_response: mu must be >= 0");
  if (!(ratio >= 0.0)) throw DomainError("linear_response: frequency ratio must be >= 0");
  const double detuning = 1.0 - ratio * ratio;
  if (mu == 0.0 && detuning == 0.0)
    throw ResonanceError("undamped resonance at r = 1", 1);
  LinearResponse out;
  out.magnification = 1.0 / std::hypot(detuning, mu);
  // Lies in [0, pi); reaches pi only for mu = 0 above resonance.
  out.phase = std::atan2(mu, detuning);
  return out;
}

}  // namespace hysteresis
