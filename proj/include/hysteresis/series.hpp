#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hysteresis/model.hpp"

namespace hysteresis {

/// Which harmonic the k-th coefficient multiplies: k + 1 for a quadratic
/// stiffness term, 2k + 1 for a cubic one.
enum class HarmonicRule { Quadratic, Cubic };

constexpr int harmonic_of(HarmonicRule rule, std::size_t k) {
  return rule == HarmonicRule::Quadratic ? static_cast<int>(k) + 1 : 2 * static_cast<int>(k) + 1;
}

/// Neumaier-compensated accumulator; works for real and complex scalars.
template <typename T>
class CompensatedSum {
 public:
  void add(const T& value) {
    add_component(sum_, compensation_, value);
  }
  T value() const { return sum_ + compensation_; }

 private:
  template <typename R>
  static void add_component(R& sum, R& comp, const R& value) {
    const R t = sum + value;
    if (std::abs(sum) >= std::abs(value))
      comp += (sum - t) + value;
    else
      comp += (value - t) + sum;
    sum = t;
  }
  template <typename R>
  static void add_component(std::complex<R>& sum, std::complex<R>& comp,
                            const std::complex<R>& value) {
    R sr = sum.real(), si = sum.imag(), cr = comp.real(), ci = comp.imag();
    add_component(sr, cr, value.real());
    add_component(si, ci, value.imag());
    sum = {sr, si};
    comp = {cr, ci};
  }

  T sum_{};
  T compensation_{};
};

namespace detail {

template <typename Real>
std::complex<Real> harmonic_denominator(std::complex<Real> omega1_sq, Real omega, int harmonic) {
  const Real w = static_cast<Real>(harmonic) * omega;
  return omega1_sq - w * w;
}

template <typename Real>
void check_denominator(const std::complex<Real>& d, int harmonic) {
  if (d == std::complex<Real>(0))
    throw ResonanceError("resonant denominator at harmonic " + std::to_string(harmonic), harmonic);
}

}  // namespace detail

/// Bare coefficients B_0..B_{n-1} of the periodic attractor of
///   x'' + Omega1^2 x + eps x^2 = F exp(i w t),
/// so that x(t) = sum_k eps^k B_k exp(i (k+1) w t). The coefficients do not
/// depend on eps.
template <typename Real>
std::vector<std::complex<Real>> quadratic_coefficients(std::complex<Real> omega1_sq,
                                                       std::complex<Real> forcing, Real omega,
                                                       std::size_t n) {
  using C = std::complex<Real>;
  std::vector<C> B;
  B.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int harmonic = harmonic_of(HarmonicRule::Quadratic, k);
    const C d = detail::harmonic_denominator(omega1_sq, omega, harmonic);
    detail::check_denominator(d, harmonic);
    if (k == 0) {
      B.push_back(forcing / d);
      continue;
    }
    // Full convolution sum_{i+j=k-1} B_i B_j: off-diagonal pairs twice, the
    // diagonal term only when k-1 is even.
    const std::size_t m = k - 1;
    CompensatedSum<C> off;
    for (std::size_t i = m; 2 * i > m; --i) off.add(B[i] * B[m - i]);
    C total = Real(2) * off.value();
    if (m % 2 == 0) total += B[m / 2] * B[m / 2];
    B.push_back(-total / d);
  }
  return B;
}

/// Bare coefficients of the attractor of x'' + Omega1^2 x + eps x^3 = F exp(i w t),
/// x(t) = sum_k eps^k B_k exp(i (2k+1) w t).
template <typename Real>
std::vector<std::complex<Real>> cubic_coefficients(std::complex<Real> omega1_sq,
                                                   std::complex<Real> forcing, Real omega,
                                                   std::size_t n) {
  using C = std::complex<Real>;
  std::vector<C> B;
  B.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int harmonic = harmonic_of(HarmonicRule::Cubic, k);
    const C d = detail::harmonic_denominator(omega1_sq, omega, harmonic);
    detail::check_denominator(d, harmonic);
    if (k == 0) {
      B.push_back(forcing / d);
      continue;
    }
    // Ordered triples with i + j + l = k - 1, enumerated as i >= j >= l with
    // multiplicity 1 (all equal), 3 (two equal) or 6 (all distinct).
    const std::size_t m = k - 1;
    CompensatedSum<C> sum;
    for (std::size_t i = m; 3 * i >= m; --i) {
      const std::size_t rest = m - i;
      for (std::size_t j = std::min(i, rest); 2 * j >= rest; --j) {
        const std::size_t l = rest - j;
        const int multiplicity = (i == j && j == l) ? 1 : (i == j || j == l) ? 3 : 6;
        sum.add(Real(multiplicity) * B[i] * B[j] * B[l]);
        if (j == 0) break;
      }
      if (i == 0) break;
    }
    B.push_back(-sum.value() / d);
  }
  return B;
}

/// Truncated Fourier series of the t -> infinity periodic attractor of a
/// quadratic or cubic Bishop oscillator.
struct FourierAttractor {
  ModelSpec model;
  HarmonicRule rule = HarmonicRule::Quadratic;
  double omega = 1.0;
  double epsilon = 0.0;
  Complex omega1_sq;
  Complex forcing;  ///< per unit mass
  std::vector<Complex> coefficients;

  std::size_t size() const { return coefficients.size(); }
  int harmonic(std::size_t k) const { return harmonic_of(rule, k); }
  double period() const;
};

struct SeriesState {
  Complex x;
  Complex v;
  Complex a;
};

/// Builds the attractor for a bishop-quadratic or bishop-cubic spec with
/// forcing. Throws ModelError for other variants and ResonanceError when a
/// harmonic denominator vanishes.
FourierAttractor build_attractor(const ModelSpec& spec, std::size_t terms = 150);

FourierAttractor coefficients_quadratic(const BishopParams& params, const ForcingSpec& forcing,
                                        double epsilon, std::size_t terms = 150);
FourierAttractor coefficients_cubic(const BishopParams& params, const ForcingSpec& forcing,
                                    double epsilon, std::size_t terms = 150);

SeriesState evaluate(const FourierAttractor& attractor, double t);

/// Q = x'' + Omega1^2 x + eps x^n - F exp(i w t) evaluated on the series.
Complex residual_q(const FourierAttractor& attractor, double t);

/// max |Q| over `samples` equally spaced points in [t0, t1].
double max_residual(const FourierAttractor& attractor, double t0, double t1, std::size_t samples);

struct ConvergenceReport {
  std::vector<double> magnitudes;         ///< |B_k|
  std::optional<double> slope;            ///< log|B_k| vs log k over the upper half
  double tail_bound = 0.0;                ///< sum_{k >= N/2} eps^k |B_k|
  double head_sum = 0.0;                  ///< sum_{k < N/2} eps^k |B_k|
  bool accepted = false;
};

/// Requires at least 32 terms.
ConvergenceReport convergence_report(const FourierAttractor& attractor);

/// Coefficients of the transient factors exp(2 g(t)) and exp(g(t) + i w t)
/// that appear at first order in eps for the quadratic model,
/// g(t) = w1 (-b + i c) t + i theta.
struct TransientCoefficients {
  Complex lambda1;
  Complex lambda2;
};

TransientCoefficients quadratic_transient_coefficients(const BishopParams& params, Complex forcing,
                                                       double omega, double alpha);

nlohmann::json to_json(const FourierAttractor& attractor);
/// Restores rule, omega, epsilon and coefficients. The model spec is not part
/// of the format and is left default-constructed.
FourierAttractor attractor_from_json(const nlohmann::json& j);

}  // namespace hysteresis
