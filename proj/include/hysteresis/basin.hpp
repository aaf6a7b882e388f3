#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hysteresis/model.hpp"
#include "hysteresis/ode.hpp"

namespace hysteresis {

using SectionState = Eigen::Vector2d;
using Cycle = std::vector<SectionState>;

struct StrobeConfig {
  double match_radius = 1e-4;  ///< rho
  int transient = 300;         ///< strobes discarded before matching starts
  int p_max = 12;
  int consecutive = 20;
  /// Matching keeps scanning past the transient until this many strobes;
  /// slowly damped orbits need far more than the transient to settle.
  int max_strobes = 6000;
  double phase = 0.0;  ///< section time t0, at forcing phase zero by default

  void validate() const;
};

/// Section states s_m = (x, v)(t0 + m T*) for m = 0..count.
struct StroboscopicOrbit {
  double period = 0.0;
  double phase = 0.0;
  int transient = 0;
  std::vector<SectionState> sections;
  bool escaped = false;
};

/// Stroboscopic samples via dense output. Stops early when |x| reaches the
/// blow-up threshold (escaped = true).
StroboscopicOrbit stroboscopic_orbit(const ModelSpec& spec, const ReidState& initial, int count,
                                     const IntegratorConfig& cfg, const StrobeConfig& strobe = {});

enum class PeriodStatus { Resolved, Unresolved, Escaped };

struct PeriodResult {
  PeriodStatus status = PeriodStatus::Unresolved;
  int period_multiple = 0;
  Cycle cycle;  ///< p section states starting from the polished representative
  int strobes_used = 0;
};

/// Smallest p <= p_max for which |s_{m+p} - s_m| < rho holds for
/// `consecutive` successive m past the transient. The detected cycle is then
/// polished by Newton iteration on the p-fold section map, and p is reduced
/// to the least period of the polished cycle.
PeriodResult classify_period(const ModelSpec& spec, const ReidState& initial,
                             const IntegratorConfig& cfg, const StrobeConfig& strobe = {});

struct AttractorClass {
  int id = 0;
  int period_multiple = 1;
  Cycle cycle;
  double match_radius = 1e-4;
};

/// True when the cycles have equal length and some cyclic shift of `b` lies
/// within `radius` of `a` state by state.
bool same_cycle(const Cycle& a, const Cycle& b, double radius);

inline constexpr int kUnresolvedLabel = -1;
inline constexpr int kEscapedLabel = -2;

struct GridConfig {
  double x_lo = -3.0;
  double x_hi = 3.0;
  double v_lo = -3.0;
  double v_hi = 1.0;
  int nx = 200;
  int ny = 200;

  void validate() const;
  /// Cell centres, so an open window is sampled strictly inside.
  double x0(int i) const { return x_lo + (x_hi - x_lo) * (i + 0.5) / nx; }
  double v0(int j) const { return v_lo + (v_hi - v_lo) * (j + 0.5) / ny; }
};

struct BasinGrid {
  GridConfig grid;
  std::vector<int> labels;  ///< row-major: labels[j * nx + i] for (x0(i), v0(j))
  std::vector<AttractorClass> catalog;

  int label(int i, int j) const { return labels[static_cast<std::size_t>(j) * grid.nx + i]; }
};

/// Classifies every cell on `threads` workers. Class ids are assigned by a
/// single reducer in row-major first-appearance order, so labels do not
/// depend on the worker count.
BasinGrid build_basin(const ModelSpec& spec, const GridConfig& grid, const IntegratorConfig& cfg,
                      const StrobeConfig& strobe = {}, unsigned threads = 1);

std::string basin_csv(const BasinGrid& basin);
nlohmann::json catalog_json(const BasinGrid& basin, const StrobeConfig& strobe = {});
/// ASCII greymap (P2); class id + 2, escaped 1, unresolved 0; top row is v_hi.
std::string basin_pgm(const BasinGrid& basin);

}  // namespace hysteresis
