#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hysteresis/model.hpp"
#include "hysteresis/ode.hpp"

namespace hysteresis {

enum class ResponseSource { ClosedForm, FourierSeries, TimeIntegration };

std::string to_string(ResponseSource source);

struct ResponsePoint {
  double omega = 0.0;
  double ratio = 0.0;          ///< r = w / w1
  double magnification = 0.0;  ///< n, half peak-to-peak of Re x over |F| / k
  double phase = 0.0;          ///< eta, lag of the fundamental behind the forcing
  double fundamental = 0.0;    ///< |fundamental harmonic| k / |F|
  ResponseSource source = ResponseSource::ClosedForm;
  /// The requested method was unavailable here (series not accepted) or
  /// the fallback itself failed (n is NaN then).
  bool flagged = false;
};

enum class ResponseMethod { Auto, ClosedForm, FourierSeries, TimeIntegration };

struct SweepConfig {
  double r_lo = 0.05;
  double r_hi = 3.0;
  int samples = 400;
  ResponseMethod method = ResponseMethod::Auto;
  std::size_t terms = 150;
  /// Bishop fallback: periods integrated before measuring one period when
  /// the start is only the linear particular solution. A start on an
  /// accurate series state is measured right away.
  int settle_periods = 5;
  /// Reid: periods integrated from rest before measuring.
  int reid_transient_periods = 100;
  int samples_per_period = 1024;
  IntegratorConfig integrator;
  unsigned threads = 1;

  void validate() const;
};

/// Logarithmic grid of n points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

/// One response point at forcing frequency omega (the spec's forcing
/// frequency is replaced). Linear Bishop uses the closed form; Bishop
/// quadratic/cubic use the Fourier series when accepted, otherwise time
/// integration from the series or linear attractor state; Reid always uses
/// time integration from rest.
ResponsePoint response_point(const ModelSpec& spec, double omega, const SweepConfig& cfg);

/// Sweep over r in [r_lo, r_hi] (log grid), omega = r w1, in omega order.
/// Phases are unwrapped along the sweep.
std::vector<ResponsePoint> response_sweep(const ModelSpec& spec, const SweepConfig& cfg);

std::string response_csv(const std::vector<ResponsePoint>& points);

/// One steady-state forcing cycle of a Reid model, reached from rest after
/// cfg.reid_transient_periods periods.
struct ReidCycle {
  double omega = 0.0;
  double amplitude = 0.0;  ///< half peak-to-peak of x
  double work = 0.0;       ///< trapezoidal integral of c |x| |v| over the cycle
};

ReidCycle reid_steady_cycle(const ModelSpec& spec, const SweepConfig& cfg);

enum class ProbeVerdict { Bounded, Escaped };

struct ProbeRecord {
  double amplitude = 0.0;
  ProbeVerdict verdict = ProbeVerdict::Bounded;
  std::optional<double> escape_time;        ///< at the working tolerance
  std::optional<double> escape_time_tight;  ///< at tolerance / 1000
  std::string start;  ///< fourier-attractor, linear-attractor or rest
};

struct EscapeSearchConfig {
  double f_lo = 0.0;
  double f_hi = 20.0;
  double tolerance = 1e-3;
  double horizon_periods = 500.0;
  /// Escape times at the two tolerances must agree to this relative amount.
  double agreement = 0.05;
  double tighten = 1e-3;
  int confirm_probes = 3;
  IntegratorConfig integrator;

  void validate() const;
};

struct EscapeResult {
  double epsilon = 0.0;
  double omega = 0.0;
  double mu = 0.0;
  double critical = 0.0;  ///< F_c, midpoint of the final bracket
  double bracket = 0.0;   ///< bracket width
  double bounded_at = 0.0;
  double escaped_at = 0.0;
  std::vector<ProbeRecord> probes;
  std::string initial_condition = "periodic attractor";
};

class BracketNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MonotonicityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single probe of the quadratic Bishop model (k = M = 1) with real forcing
/// amplitude F. The probe starts on the periodic attractor (Fourier series
/// when its residual is small, linear particular solution otherwise) and
/// counts as escaped when Re x falls below x_s = -1/eps, or |x| reaches the
/// blow-up threshold, at times that agree between the working tolerance and
/// one a thousand times tighter. Crossings driven by the spurious growing
/// mode move with the tolerance and are treated as bounded.
ProbeRecord escape_probe(double epsilon, double omega, double mu, double amplitude,
                         const EscapeSearchConfig& cfg);

/// Bisection for the critical amplitude F_c on [f_lo, f_hi].
EscapeResult critical_amplitude(double epsilon, double omega, double mu,
                                const EscapeSearchConfig& cfg = {});

std::string escape_csv(const std::vector<EscapeResult>& results);

}  // namespace hysteresis
