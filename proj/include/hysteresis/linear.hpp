#pragma once

#include "hysteresis/model.hpp"

namespace hysteresis {

/// Decay constant b and frequency constant c of the free linear Bishop
/// oscillator; they satisfy c^2 - b^2 = 1 and 2 b c = mu.
struct FreeConstants {
  double b = 0.0;
  double c = 1.0;
};

FreeConstants free_constants(double mu);

/// x(t) = alpha exp(-w1 b t) exp(i (w1 c t + theta)), the decaying branch of the
/// free complex oscillator.
class FreeSolution {
 public:
  static FreeSolution from_amplitude_phase(const BishopParams& params, double alpha, double theta);
  /// Only states on the decaying branch are admissible: v0 must equal
  /// w1 (-b + i c) x0 to within a relative 1e-9, otherwise DomainError.
  static FreeSolution from_initial_state(const BishopParams& params, Complex x0, Complex v0);

  BishopState state(double t) const;
  Complex acceleration(double t) const;

  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  double omega1() const { return omega1_; }
  const FreeConstants& constants() const { return constants_; }
  /// Complex exponent g'(t) = w1 (-b + i c).
  Complex rate() const { return omega1_ * Complex(-constants_.b, constants_.c); }

 private:
  FreeSolution(double alpha, double theta, double omega1, FreeConstants constants)
      : alpha_(alpha), theta_(theta), omega1_(omega1), constants_(constants) {}

  double alpha_;
  double theta_;
  double omega1_;
  FreeConstants constants_;
};

/// Free decaying part plus the particular response B exp(i w t).
class ForcedSolution {
 public:
  static ForcedSolution from_amplitude_phase(const BishopParams& params, Complex forcing,
                                             double omega, double alpha, double theta);
  static ForcedSolution from_initial_state(const BishopParams& params, Complex forcing,
                                           double omega, Complex x0, Complex v0);

  BishopState state(double t) const;
  Complex acceleration(double t) const;
  /// The steady state B exp(i w t) alone.
  BishopState particular(double t) const;

  Complex particular_coefficient() const { return coefficient_; }
  const FreeSolution& homogeneous() const { return free_; }
  double omega() const { return omega_; }

 private:
  ForcedSolution(FreeSolution free, Complex coefficient, double omega)
      : free_(free), coefficient_(coefficient), omega_(omega) {}

  FreeSolution free_;
  Complex coefficient_;
  double omega_;
};

/// B = (F/M) / (w1^2 (1 + i mu) - w^2). Throws ResonanceError when mu = 0 and w = w1.
Complex particular_coefficient(const BishopParams& params, Complex forcing, double omega);

struct LinearResponse {
  double magnification = 0.0;  ///< n
  double phase = 0.0;          ///< eta in [0, pi)
};

/// n = ((1 - r^2)^2 + mu^2)^(-1/2), eta = atan2(mu, 1 - r^2).
LinearResponse linear_response(double mu, double ratio);

}  // namespace hysteresis
