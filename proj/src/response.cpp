#include "hysteresis/response.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "hysteresis/linear.hpp"
#include "hysteresis/parallel.hpp"
#include "hysteresis/series.hpp"
#include "hysteresis/trajectory.hpp"

namespace hysteresis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double natural_frequency(const ModelSpec& spec) {
  if (is_bishop(spec.variant)) return spec.bishop().natural_frequency();
  const ReidParams& p = spec.reid();
  return std::sqrt(p.stiffness / p.mass);
}

double stiffness(const ModelSpec& spec) {
  return is_bishop(spec.variant) ? spec.bishop().stiffness : spec.reid().stiffness;
}

ModelSpec with_omega(ModelSpec spec, double omega) {
  if (!spec.forcing) throw ModelError("response analysis needs forcing");
  spec.forcing->omega = omega;
  spec.validate();
  return spec;
}

/// Re x of the series, with the eps powers folded in and negligible terms dropped.
class RealPartEvaluator {
 public:
  explicit RealPartEvaluator(const FourierAttractor& a) : omega_(a.omega) {
    double weight = 1.0;
    const double head = std::abs(a.coefficients.front());
    for (std::size_t k = 0; k < a.size() && weight != 0.0; ++k) {
      const Complex c = weight * a.coefficients[k];
      if (k == 0 || std::abs(c) > 1e-18 * head) terms_.push_back({c, a.harmonic(k)});
      weight *= a.epsilon;
    }
  }
  double operator()(double t) const {
    CompensatedSum<double> sum;
    for (const auto& [c, h] : terms_) {
      const double phase = h * omega_ * t;
      sum.add(c.real() * std::cos(phase) - c.imag() * std::sin(phase));
    }
    return sum.value();
  }

 private:
  double omega_;
  std::vector<std::pair<Complex, int>> terms_;
};

/// Half peak-to-peak of a periodic function: dense sampling, then Brent
/// refinement around the best samples.
template <typename Fn>
double half_peak_to_peak(const Fn& fn, double period, int samples) {
  std::vector<double> values(samples);
  for (int i = 0; i < samples; ++i) values[i] = fn(period * i / samples);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double h = period / samples;
  auto refine = [&](int index, double sign) {
    const double centre = period * index / samples;
    auto objective = [&](double t) { return sign * fn(t); };
    const auto best = boost::math::tools::brent_find_minima(objective, centre - h, centre + h, 52);
    return std::min(sign * values[index], best.second) * sign;
  };
  const double lo = refine(static_cast<int>(lo_it - values.begin()), 1.0);
  const double hi = refine(static_cast<int>(hi_it - values.begin()), -1.0);
  return 0.5 * (hi - lo);
}

/// Uniform samples of one period [t0, t0 + T) out of a segment stream.
template <int Dim>
struct PeriodSampler {
  double t0;
  double step;
  int count;
  std::vector<StateVector<Dim>> samples;

  bool take(const StepSegment<Dim>& seg) {
    while (static_cast<int>(samples.size()) < count) {
      const double t = t0 + step * static_cast<double>(samples.size());
      if (t > seg.t1) break;
      samples.push_back(t == seg.t1 ? seg.y1 : seg.interpolate(t));
    }
    return static_cast<int>(samples.size()) < count;
  }
};

ResponsePoint series_point(const ModelSpec& spec, const FourierAttractor& a, const SweepConfig& cfg) {
  ResponsePoint pt;
  const double k = stiffness(spec);
  const Complex forcing = spec.forcing_amplitude();
  const RealPartEvaluator re(a);
  pt.magnification = half_peak_to_peak(re, a.period(), 4096) * k / std::abs(forcing);
  pt.fundamental = std::abs(a.coefficients.front()) * k / std::abs(forcing);
  pt.phase = std::arg(forcing) - std::arg(a.coefficients.front());
  pt.source = ResponseSource::FourierSeries;
  (void)cfg;
  return pt;
}

ResponsePoint bishop_integration_point(const ModelSpec& spec, const SweepConfig& cfg) {
  ResponsePoint pt;
  pt.source = ResponseSource::TimeIntegration;
  const BishopParams& p = spec.bishop();
  const Complex forcing = spec.forcing_amplitude();
  const double omega = spec.forcing_omega();
  const double period = 2.0 * std::numbers::pi / omega;

  // Start on the attractor so the growing free mode is only seeded by rounding.
  // Settling is needed only when the start is the linear approximation; any
  // extra time on an accurate start just feeds the growing mode.
  BishopState start;
  const Complex b0 = particular_coefficient(p, forcing, omega);
  start = {b0, Complex(0.0, omega) * b0};
  bool on_attractor = spec.variant == Variant::BishopLinear;
  if (!on_attractor) {
    const FourierAttractor a = build_attractor(spec, cfg.terms);
    const SeriesState s = evaluate(a, 0.0);
    if (std::isfinite(std::abs(s.x)) && std::isfinite(std::abs(s.v)) &&
        max_residual(a, 0.0, period, 256) <= 1e-8 * std::max(std::abs(forcing), 1e-300)) {
      start = {s.x, s.v};
      on_attractor = true;
    }
  }

  const double t_measure = on_attractor ? 0.0 : cfg.settle_periods * period;
  PeriodSampler<4> sampler{t_measure, period / cfg.samples_per_period, cfg.samples_per_period, {}};
  bool blew_up = false;
  integrate_bishop_segments(spec, start, 0.0, t_measure + period, cfg.integrator,
                            [&](const StepSegment<4>& seg) {
                              if (std::hypot(seg.y1[0], seg.y1[1]) >= cfg.integrator.blowup_threshold) {
                                blew_up = true;
                                return false;
                              }
                              return sampler.take(seg);
                            });
  if (blew_up || static_cast<int>(sampler.samples.size()) < cfg.samples_per_period) {
    pt.magnification = pt.fundamental = pt.phase = kNaN;
    pt.flagged = true;
    return pt;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  CompensatedSum<Complex> c1;
  for (int j = 0; j < cfg.samples_per_period; ++j) {
    const auto& y = sampler.samples[j];
    lo = std::min(lo, y[0]);
    hi = std::max(hi, y[0]);
    c1.add(Complex(y[0], y[1]) * std::polar(1.0, -omega * (t_measure + sampler.step * j)));
  }
  const Complex fundamental = c1.value() / static_cast<double>(cfg.samples_per_period);
  pt.magnification = 0.5 * (hi - lo) * p.stiffness / std::abs(forcing);
  pt.fundamental = std::abs(fundamental) * p.stiffness / std::abs(forcing);
  pt.phase = std::arg(forcing) - std::arg(fundamental);
  return pt;
}

ResponsePoint reid_point(const ModelSpec& spec, const SweepConfig& cfg) {
  ResponsePoint pt;
  pt.source = ResponseSource::TimeIntegration;
  const ReidParams& p = spec.reid();
  const double f = spec.forcing_amplitude().real();
  if (f == 0.0) throw ModelError("response needs a nonzero forcing amplitude");
  const double omega = spec.forcing_omega();
  const double period = 2.0 * std::numbers::pi / omega;
  const double t_measure = cfg.reid_transient_periods * period;
  PeriodSampler<2> sampler{t_measure, period / cfg.samples_per_period, cfg.samples_per_period, {}};
  bool blew_up = false;
  integrate_reid_segments(spec, {0.0, 0.0}, 0.0, t_measure + period, cfg.integrator,
                          [&](const StepSegment<2>& seg) {
                            if (std::abs(seg.y1[0]) >= cfg.integrator.blowup_threshold) {
                              blew_up = true;
                              return false;
                            }
                            return sampler.take(seg);
                          });
  if (blew_up || static_cast<int>(sampler.samples.size()) < cfg.samples_per_period) {
    pt.magnification = pt.fundamental = pt.phase = kNaN;
    pt.flagged = true;
    return pt;
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  CompensatedSum<double> a1, b1;
  for (int j = 0; j < cfg.samples_per_period; ++j) {
    const double x = sampler.samples[j][0];
    const double wt = omega * sampler.step * j;  // t_measure is a whole number of periods
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    a1.add(x * std::cos(wt));
    b1.add(x * std::sin(wt));
  }
  const double scale = 2.0 / cfg.samples_per_period;
  const double ac = a1.value() * scale, bs = b1.value() * scale;
  // x ~ A sin(w t - eta) = A (sin w t cos eta - cos w t sin eta)
  pt.magnification = 0.5 * (hi - lo) * p.stiffness / std::abs(f);
  pt.fundamental = std::hypot(ac, bs) * p.stiffness / std::abs(f);
  pt.phase = std::atan2(-ac, bs);
  return pt;
}

}  // namespace

ReidCycle reid_steady_cycle(const ModelSpec& spec, const SweepConfig& cfg) {
  cfg.validate();
  const ReidParams& p = spec.reid();
  const double omega = spec.forcing_omega();
  const double period = 2.0 * std::numbers::pi / omega;
  const double t_measure = cfg.reid_transient_periods * period;
  const int n = cfg.samples_per_period;
  PeriodSampler<2> sampler{t_measure, period / n, n + 1, {}};
  integrate_reid_segments(spec, {0.0, 0.0}, 0.0, t_measure + period, cfg.integrator,
                          [&](const StepSegment<2>& seg) { return sampler.take(seg); });
  if (static_cast<int>(sampler.samples.size()) < n + 1)
    throw std::runtime_error("Reid cycle did not reach the measurement period");
  ReidCycle cycle;
  cycle.omega = omega;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  CompensatedSum<double> work;
  for (int j = 0; j <= n; ++j) {
    const auto& y = sampler.samples[j];
    lo = std::min(lo, y[0]);
    hi = std::max(hi, y[0]);
    const double power = p.damping * std::abs(y[0]) * std::abs(y[1]);
    work.add((j == 0 || j == n ? 0.5 : 1.0) * power);
  }
  cycle.amplitude = 0.5 * (hi - lo);
  cycle.work = work.value() * sampler.step;
  return cycle;
}

std::string to_string(ResponseSource source) {
  switch (source) {
    case ResponseSource::ClosedForm:
      return "closed-form";
    case ResponseSource::FourierSeries:
      return "fourier-series";
    case ResponseSource::TimeIntegration:
      return "time-integration";
  }
  return "unknown";
}

void SweepConfig::validate() const {
  if (!(r_lo > 0.0 && r_hi > r_lo)) throw std::invalid_argument("sweep needs 0 < r_lo < r_hi");
  if (samples < 2) throw std::invalid_argument("sweep needs at least 2 samples");
  if (terms < 32) throw std::invalid_argument("series sweeps need at least 32 terms");
  if (settle_periods < 0 || reid_transient_periods < 0)
    throw std::invalid_argument("transient periods must be >= 0");
  if (samples_per_period < 16) throw std::invalid_argument("samples per period must be >= 16");
  integrator.validate();
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

ResponsePoint response_point(const ModelSpec& base, double omega, const SweepConfig& cfg) {
  const ModelSpec spec = with_omega(base, omega);
  ResponseMethod method = cfg.method;
  if (method == ResponseMethod::Auto) {
    if (is_reid(spec.variant))
      method = ResponseMethod::TimeIntegration;
    else if (spec.variant == Variant::BishopLinear)
      method = ResponseMethod::ClosedForm;
    else
      method = ResponseMethod::FourierSeries;
  }

  ResponsePoint pt;
  switch (method) {
    case ResponseMethod::ClosedForm: {
      if (spec.variant != Variant::BishopLinear)
        throw ModelError("closed-form response exists only for bishop-linear");
      const BishopParams& p = spec.bishop();
      const LinearResponse lr = linear_response(p.loss_factor(), omega / p.natural_frequency());
      pt.magnification = pt.fundamental = lr.magnification;
      pt.phase = lr.phase;
      pt.source = ResponseSource::ClosedForm;
      break;
    }
    case ResponseMethod::FourierSeries: {
      if (!is_bishop(spec.variant) || spec.variant == Variant::BishopLinear)
        throw ModelError("series response needs bishop-quadratic or bishop-cubic");
      const FourierAttractor a = build_attractor(spec, cfg.terms);
      if (convergence_report(a).accepted) {
        pt = series_point(spec, a, cfg);
      } else {
        pt = bishop_integration_point(spec, cfg);
        pt.flagged = true;
      }
      break;
    }
    case ResponseMethod::TimeIntegration:
    case ResponseMethod::Auto:
      pt = is_reid(spec.variant) ? reid_point(spec, cfg) : bishop_integration_point(spec, cfg);
      break;
  }
  pt.omega = omega;
  pt.ratio = omega / natural_frequency(spec);
  return pt;
}

std::vector<ResponsePoint> response_sweep(const ModelSpec& spec, const SweepConfig& cfg) {
  cfg.validate();
  const double w1 = natural_frequency(spec);
  const std::vector<double> ratios = log_grid(cfg.r_lo, cfg.r_hi, cfg.samples);
  std::vector<ResponsePoint> points(ratios.size());
  parallel_for(ratios.size(), cfg.threads,
               [&](std::size_t i) { points[i] = response_point(spec, ratios[i] * w1, cfg); });

  // Unwrap the phase along the sweep.
  double offset = 0.0;
  std::optional<double> previous;
  for (ResponsePoint& pt : points) {
    if (!std::isfinite(pt.phase)) continue;
    double eta = pt.phase + offset;
    if (previous) {
      while (eta - *previous > std::numbers::pi) eta -= 2.0 * std::numbers::pi, offset -= 2.0 * std::numbers::pi;
      while (eta - *previous < -std::numbers::pi) eta += 2.0 * std::numbers::pi, offset += 2.0 * std::numbers::pi;
    }
    pt.phase = eta;
    previous = eta;
  }
  return points;
}

std::string response_csv(const std::vector<ResponsePoint>& points) {
  std::string out = "omega,r,n,eta,n_fundamental,source\n";
  for (const ResponsePoint& p : points)
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}{}\n", p.omega, p.ratio,
                       p.magnification, p.phase, p.fundamental, to_string(p.source),
                       p.flagged ? "*" : "");
  return out;
}

void EscapeSearchConfig::validate() const {
  if (!(f_lo >= 0.0 && f_hi > f_lo)) throw std::invalid_argument("escape search needs 0 <= F_lo < F_hi");
  if (!(tolerance > 0.0)) throw std::invalid_argument("escape search tolerance must be > 0");
  if (!(horizon_periods > 0.0)) throw std::invalid_argument("probe horizon must be > 0");
  if (!(agreement > 0.0 && agreement < 1.0)) throw std::invalid_argument("agreement must lie in (0, 1)");
  if (!(tighten > 0.0 && tighten < 1.0)) throw std::invalid_argument("tighten must lie in (0, 1)");
  if (confirm_probes < 0) throw std::invalid_argument("confirm probes must be >= 0");
  integrator.validate();
}

namespace {

ModelSpec quadratic_probe_model(double epsilon, double omega, double mu, double amplitude) {
  return make_bishop(Variant::BishopQuadratic, 1.0, mu, epsilon,
                     ForcingSpec{Complex(amplitude, 0.0), omega, Waveform::ComplexExponential}, 1.0);
}

/// Start state on the periodic attractor and a label for it.
std::pair<BishopState, std::string> probe_start(const ModelSpec& spec) {
  const Complex forcing = spec.forcing_amplitude();
  const double omega = spec.forcing_omega();
  if (forcing == Complex(0.0, 0.0)) return {{}, "rest"};
  const FourierAttractor a = build_attractor(spec);
  const SeriesState s = evaluate(a, 0.0);
  if (std::isfinite(std::abs(s.x)) && std::isfinite(std::abs(s.v)) &&
      max_residual(a, 0.0, a.period(), 256) <= 1e-8 * std::abs(forcing))
    return {{s.x, s.v}, "fourier-attractor"};
  const Complex b0 = a.coefficients.front();
  return {{b0, Complex(0.0, omega) * b0}, "linear-attractor"};
}

/// First time Re x < x_s (located on the dense output) or |x| >= X_max.
std::optional<double> escape_time(const ModelSpec& spec, const BishopState& start, double t_end,
                                  const IntegratorConfig& cfg) {
  const double saddle = -1.0 / spec.bishop().epsilon;
  std::optional<double> found;
  integrate_bishop_segments(spec, start, 0.0, t_end, cfg, [&](const StepSegment<4>& seg) {
    if (seg.y1[0] < saddle) {
      double lo = seg.t0, hi = seg.t1;
      if (seg.y0[0] >= saddle) {
        for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          (seg.interpolate(mid)[0] < saddle ? hi : lo) = mid;
        }
      }
      found = hi;
      return false;
    }
    if (std::hypot(seg.y1[0], seg.y1[1]) >= cfg.blowup_threshold) {
      found = seg.t1;
      return false;
    }
    return true;
  });
  return found;
}

}  // namespace

ProbeRecord escape_probe(double epsilon, double omega, double mu, double amplitude,
                         const EscapeSearchConfig& cfg) {
  if (!(epsilon > 0.0)) throw DomainError("escape needs epsilon > 0");
  const ModelSpec spec = quadratic_probe_model(epsilon, omega, mu, amplitude);
  const auto [start, label] = probe_start(spec);
  const double horizon = cfg.horizon_periods * 2.0 * std::numbers::pi / omega;
  IntegratorConfig tight = cfg.integrator;
  tight.rtol *= cfg.tighten;
  tight.atol *= cfg.tighten;

  ProbeRecord record;
  record.amplitude = amplitude;
  record.start = label;
  record.escape_time = escape_time(spec, start, horizon, cfg.integrator);
  if (record.escape_time) record.escape_time_tight = escape_time(spec, start, horizon, tight);
  if (record.escape_time && record.escape_time_tight) {
    const double a = *record.escape_time, b = *record.escape_time_tight;
    if (std::abs(a - b) <= cfg.agreement * std::max(a, b)) record.verdict = ProbeVerdict::Escaped;
  }
  return record;
}

EscapeResult critical_amplitude(double epsilon, double omega, double mu,
                                const EscapeSearchConfig& cfg) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw DomainError("escape needs epsilon > 0");
  EscapeResult result;
  result.epsilon = epsilon;
  result.omega = omega;
  result.mu = mu;

  auto probe = [&](double f) {
    result.probes.push_back(escape_probe(epsilon, omega, mu, f, cfg));
    return result.probes.back().verdict;
  };
  if (probe(cfg.f_hi) != ProbeVerdict::Escaped)
    throw BracketNotFound(fmt::format(
        "no escape at F_hi = {} (eps = {}, omega = {}, mu = {}); try a larger F_hi", cfg.f_hi,
        epsilon, omega, mu));
  if (probe(cfg.f_lo) != ProbeVerdict::Bounded)
    throw BracketNotFound(fmt::format("escape already at F_lo = {}; try a smaller F_lo", cfg.f_lo));

  double lo = cfg.f_lo, hi = cfg.f_hi;
  while (hi - lo > cfg.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (probe(mid) == ProbeVerdict::Escaped ? hi : lo) = mid;
  }
  // Escape must persist above the bracket; a bounded probe there means the
  // boundary is not a single threshold.
  for (int j = 1; j <= cfg.confirm_probes; ++j) {
    const double f = hi + (cfg.f_hi - hi) * j / (cfg.confirm_probes + 1);
    if (probe(f) != ProbeVerdict::Escaped)
      throw MonotonicityViolation(fmt::format(
          "bounded probe at F = {} above escaped F = {} (eps = {}, omega = {}, mu = {})", f, hi,
          epsilon, omega, mu));
  }
  result.bounded_at = lo;
  result.escaped_at = hi;
  result.critical = 0.5 * (lo + hi);
  result.bracket = hi - lo;
  return result;
}

std::string escape_csv(const std::vector<EscapeResult>& results) {
  std::string out = "epsilon,omega,mu,F_c,bracket\n";
  for (const EscapeResult& r : results)
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.epsilon, r.omega, r.mu,
                       r.critical, r.bracket);
  return out;
}

}  // namespace hysteresis
