#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

namespace hysteresis {

using Complex = std::complex<double>;

/// Raised when an operation receives a model variant it does not handle, or a
/// spec whose parameters violate their invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a closed-form expression.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A linear denominator vanished: undamped resonance, or a harmonic of the
/// forcing frequency hitting the natural frequency.
class ResonanceError : public std::domain_error {
 public:
  ResonanceError(const std::string& what, int harmonic)
      : std::domain_error(what), harmonic_(harmonic) {}
  int harmonic() const { return harmonic_; }

 private:
  int harmonic_;
};

enum class Variant { BishopLinear, BishopQuadratic, BishopCubic, ReidLinear, ReidCubic };
enum class Nonlinearity { None, Quadratic, Cubic };
enum class Waveform { ComplexExponential, Sine };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);
bool is_bishop(Variant v);
bool is_reid(Variant v);

/// Complex-stiffness oscillator  M x'' + (k + i h) x + eps x^n = F exp(i w t).
struct BishopParams {
  double mass = 1.0;
  double stiffness = 1.0;
  double hysteretic = 0.0;
  double epsilon = 0.0;
  Nonlinearity nonlinearity = Nonlinearity::None;

  double loss_factor() const { return hysteretic / stiffness; }
  double natural_frequency() const;
  /// Omega_1^2 = w1^2 (1 + i mu), per unit mass.
  Complex complex_stiffness() const { return Complex(stiffness, hysteretic) / mass; }
};

/// Reid's oscillator  M x'' + k x (1 + (c/k) sgn(x x')) + eps x^3 = f sin(w t).
struct ReidParams {
  double mass = 1.0;
  double damping = 0.0;
  double stiffness = 1.0;
  double epsilon = 0.0;
};

struct ForcingSpec {
  Complex amplitude{0.0, 0.0};
  double omega = 1.0;
  Waveform waveform = Waveform::ComplexExponential;
};

struct ModelSpec {
  Variant variant = Variant::BishopLinear;
  std::variant<BishopParams, ReidParams> params = BishopParams{};
  std::optional<ForcingSpec> forcing;

  const BishopParams& bishop() const;
  const ReidParams& reid() const;
  /// Zero when there is no forcing.
  Complex forcing_amplitude() const { return forcing ? forcing->amplitude : Complex{}; }
  double forcing_omega() const { return forcing ? forcing->omega : 0.0; }

  /// Throws ModelError on any invariant violation.
  void validate() const;
};

ModelSpec make_bishop(Variant variant, double k, double h, double epsilon = 0.0,
                      std::optional<ForcingSpec> forcing = std::nullopt, double mass = 1.0);
ModelSpec make_reid(Variant variant, double c, double k, double epsilon = 0.0,
                    std::optional<double> f = std::nullopt, double omega = 1.0,
                    double mass = 1.0);

struct BishopState {
  Complex x;
  Complex v;
};

struct ReidState {
  double x = 0.0;
  double v = 0.0;
};

/// Acceleration of the complex Bishop oscillator.
Complex rhs_bishop(const ModelSpec& spec, double t, Complex x, Complex v);

/// Acceleration of Reid's oscillator with sgn(0) = 0.
double rhs_reid(const ModelSpec& spec, double t, double x, double v);

/// Reid acceleration with the sign of x*v supplied by the caller; the
/// event-aware integrator freezes it across a step.
double rhs_reid_mode(const ReidParams& p, const std::optional<ForcingSpec>& forcing, double t,
                     double x, int sign_xv);

inline int sgn(double value) { return (value > 0.0) - (value < 0.0); }

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

}  // namespace hysteresis
