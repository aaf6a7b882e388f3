#include "hysteresis/basin.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include <Eigen/LU>
#include <fmt/format.h>

#include "hysteresis/parallel.hpp"
#include "hysteresis/trajectory.hpp"

namespace hysteresis {

void StrobeConfig::validate() const {
  if (!(match_radius > 0.0)) throw std::invalid_argument("match radius must be > 0");
  if (transient < 0) throw std::invalid_argument("transient must be >= 0");
  if (p_max < 1) throw std::invalid_argument("p_max must be >= 1");
  if (consecutive < 1) throw std::invalid_argument("consecutive matches must be >= 1");
  if (max_strobes < transient + p_max + consecutive)
    throw std::invalid_argument("max_strobes too small for transient + p_max + consecutive");
}

void GridConfig::validate() const {
  if (!(std::isfinite(x_lo) && std::isfinite(x_hi) && std::isfinite(v_lo) && std::isfinite(v_hi)))
    throw std::invalid_argument("grid ranges must be finite");
  if (!(x_hi > x_lo && v_hi > v_lo)) throw std::invalid_argument("grid ranges must be non-empty");
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid resolution must be at least 2x2");
}

namespace {

double forcing_period(const ModelSpec& spec) {
  if (!is_reid(spec.variant)) throw ModelError("stroboscopic analysis needs a Reid variant");
  if (!spec.forcing) throw ModelError("stroboscopic analysis needs forcing");
  return 2.0 * std::numbers::pi / spec.forcing->omega;
}

/// p-fold section map starting at the section phase; nullopt on blow-up.
std::optional<SectionState> section_map(const ModelSpec& spec, const SectionState& s, int p,
                                        const IntegratorConfig& cfg, double phase) {
  const double period = forcing_period(spec);
  const double t_end = phase + p * period;
  SectionState last = s;
  bool blew_up = false;
  integrate_reid_segments(spec, {s[0], s[1]}, phase, t_end, cfg, [&](const StepSegment<2>& seg) {
    last = seg.y1;
    if (std::abs(seg.y1[0]) >= cfg.blowup_threshold) {
      blew_up = true;
      return false;
    }
    return true;
  });
  if (blew_up) return std::nullopt;
  return last;
}

/// Newton iteration on F(s) = P^p(s) - s with a forward-difference Jacobian.
std::optional<SectionState> polish(const ModelSpec& spec, SectionState s, int p,
                                   const IntegratorConfig& cfg, const StrobeConfig& strobe) {
  for (int iter = 0; iter < 12; ++iter) {
    const auto y = section_map(spec, s, p, cfg, strobe.phase);
    if (!y) return std::nullopt;
    const SectionState r = *y - s;
    if (r.norm() <= 1e-11 * std::max(1.0, s.norm())) return s;
    Eigen::Matrix2d jac;
    for (int i = 0; i < 2; ++i) {
      const double delta = 1e-7 * std::max(1.0, std::abs(s[i]));
      SectionState shifted = s;
      shifted[i] += delta;
      const auto yp = section_map(spec, shifted, p, cfg, strobe.phase);
      if (!yp) return std::nullopt;
      jac.col(i) = (*yp - *y) / delta;
    }
    const Eigen::Matrix2d a = jac - Eigen::Matrix2d::Identity();
    if (std::abs(a.determinant()) < 1e-14) return std::nullopt;
    const SectionState step = a.partialPivLu().solve(-r);
    if (!step.allFinite() || step.norm() > 0.5) return std::nullopt;
    s += step;
  }
  const auto y = section_map(spec, s, p, cfg, strobe.phase);
  if (y && (*y - s).norm() < 1e-3 * strobe.match_radius) return s;
  return std::nullopt;
}

/// Rotates a cycle to start at its lexicographically smallest state.
Cycle canonical(Cycle cycle) {
  auto less = [](const SectionState& a, const SectionState& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  };
  const auto first = std::min_element(cycle.begin(), cycle.end(), less);
  std::rotate(cycle.begin(), first, cycle.end());
  return cycle;
}

}  // namespace

StroboscopicOrbit stroboscopic_orbit(const ModelSpec& spec, const ReidState& initial, int count,
                                     const IntegratorConfig& cfg, const StrobeConfig& strobe) {
  StroboscopicOrbit orbit;
  orbit.period = forcing_period(spec);
  orbit.phase = strobe.phase;
  orbit.transient = strobe.transient;
  orbit.sections.push_back({initial.x, initial.v});
  long next = 1;
  integrate_reid_segments(spec, initial, strobe.phase, strobe.phase + count * orbit.period, cfg,
                          [&](const StepSegment<2>& seg) {
                            for (;;) {
                              const double tk = strobe.phase + next * orbit.period;
                              if (tk > seg.t1) break;
                              orbit.sections.push_back(tk == seg.t1 ? seg.y1 : seg.interpolate(tk));
                              ++next;
                            }
                            if (std::abs(seg.y1[0]) >= cfg.blowup_threshold) {
                              orbit.escaped = true;
                              return false;
                            }
                            return true;
                          });
  return orbit;
}

PeriodResult classify_period(const ModelSpec& spec, const ReidState& initial,
                             const IntegratorConfig& cfg, const StrobeConfig& strobe) {
  strobe.validate();
  const double period = forcing_period(spec);
  PeriodResult result;
  std::vector<SectionState> s{{initial.x, initial.v}};
  s.reserve(static_cast<std::size_t>(strobe.max_strobes) + 1);
  std::vector<int> run(static_cast<std::size_t>(strobe.p_max) + 1, 0);
  int detected = 0;
  bool escaped = false;
  long next = 1;

  auto on_strobe = [&](const SectionState& y) {
    s.push_back(y);
    const int m = static_cast<int>(s.size()) - 1;
    if (m < strobe.transient + 1) return;
    for (int p = 1; p <= strobe.p_max; ++p) {
      if (m - p < strobe.transient) continue;
      run[p] = (s[m] - s[m - p]).norm() < strobe.match_radius ? run[p] + 1 : 0;
      if (!detected && run[p] >= strobe.consecutive) detected = p;
    }
  };
  integrate_reid_segments(spec, initial, strobe.phase, strobe.phase + strobe.max_strobes * period,
                          cfg, [&](const StepSegment<2>& seg) {
                            for (;;) {
                              const double tk = strobe.phase + next * period;
                              if (tk > seg.t1) break;
                              on_strobe(tk == seg.t1 ? seg.y1 : seg.interpolate(tk));
                              ++next;
                              if (detected) return false;
                            }
                            if (std::abs(seg.y1[0]) >= cfg.blowup_threshold) {
                              escaped = true;
                              return false;
                            }
                            return true;
                          });
  result.strobes_used = static_cast<int>(s.size()) - 1;
  if (escaped) {
    result.status = PeriodStatus::Escaped;
    return result;
  }
  if (!detected) return result;

  int p = detected;
  SectionState start = s.back();
  if (auto polished = polish(spec, start, p, cfg, strobe)) start = *polished;

  Cycle cycle{start};
  for (int k = 1; k < p; ++k) {
    const auto y = section_map(spec, cycle.back(), 1, cfg, strobe.phase);
    if (!y) {
      result.status = PeriodStatus::Escaped;
      return result;
    }
    cycle.push_back(*y);
  }
  // A p-cycle that repeats after q | p strobes has least period q.
  for (int q = 1; q < p; ++q) {
    if (p % q != 0) continue;
    bool repeats = true;
    for (int k = 0; k + q < p && repeats; ++k)
      repeats = (cycle[k + q] - cycle[k]).norm() < 2.0 * strobe.match_radius;
    if (repeats) {
      cycle.resize(q);
      p = q;
      break;
    }
  }
  result.status = PeriodStatus::Resolved;
  result.period_multiple = p;
  result.cycle = canonical(std::move(cycle));
  return result;
}

bool same_cycle(const Cycle& a, const Cycle& b, double radius) {
  if (a.size() != b.size() || a.empty()) return false;
  const std::size_t n = a.size();
  for (std::size_t shift = 0; shift < n; ++shift) {
    bool match = true;
    for (std::size_t k = 0; k < n && match; ++k) match = (a[k] - b[(k + shift) % n]).norm() < radius;
    if (match) return true;
  }
  return false;
}

BasinGrid build_basin(const ModelSpec& spec, const GridConfig& grid, const IntegratorConfig& cfg,
                      const StrobeConfig& strobe, unsigned threads) {
  grid.validate();
  strobe.validate();
  cfg.validate();
  forcing_period(spec);
  const std::size_t cells = static_cast<std::size_t>(grid.nx) * grid.ny;
  std::vector<PeriodResult> results(cells);
  parallel_for(cells, threads, [&](std::size_t index) {
    const int i = static_cast<int>(index % grid.nx);
    const int j = static_cast<int>(index / grid.nx);
    results[index] = classify_period(spec, {grid.x0(i), grid.v0(j)}, cfg, strobe);
  });

  BasinGrid basin;
  basin.grid = grid;
  basin.labels.assign(cells, kUnresolvedLabel);
  for (std::size_t index = 0; index < cells; ++index) {
    const PeriodResult& r = results[index];
    if (r.status == PeriodStatus::Escaped) {
      basin.labels[index] = kEscapedLabel;
      continue;
    }
    if (r.status != PeriodStatus::Resolved) continue;
    int id = -1;
    for (const AttractorClass& c : basin.catalog)
      if (same_cycle(c.cycle, r.cycle, strobe.match_radius)) {
        id = c.id;
        break;
      }
    if (id < 0) {
      id = static_cast<int>(basin.catalog.size());
      basin.catalog.push_back({id, r.period_multiple, r.cycle, strobe.match_radius});
    }
    basin.labels[index] = id;
  }
  return basin;
}

std::string basin_csv(const BasinGrid& basin) {
  std::string out = "x0,v0,label\n";
  for (int j = 0; j < basin.grid.ny; ++j)
    for (int i = 0; i < basin.grid.nx; ++i)
      out += fmt::format("{:.17g},{:.17g},{}\n", basin.grid.x0(i), basin.grid.v0(j), basin.label(i, j));
  return out;
}

nlohmann::json catalog_json(const BasinGrid& basin, const StrobeConfig& strobe) {
  nlohmann::json classes = nlohmann::json::array();
  for (const AttractorClass& c : basin.catalog) {
    nlohmann::json states = nlohmann::json::array();
    for (const SectionState& s : c.cycle) states.push_back({s[0], s[1]});
    std::size_t cells = 0;
    for (int label : basin.labels) cells += label == c.id;
    classes.push_back({{"id", c.id},
                       {"period_multiple", c.period_multiple},
                       {"cycle", states},
                       {"cells", cells}});
  }
  std::size_t unresolved = 0, escaped = 0;
  for (int label : basin.labels) {
    unresolved += label == kUnresolvedLabel;
    escaped += label == kEscapedLabel;
  }
  return {{"classes", classes},
          {"match_radius", strobe.match_radius},
          {"transient_strobes", strobe.transient},
          {"p_max", strobe.p_max},
          {"section_phase", strobe.phase},
          {"unresolved_cells", unresolved},
          {"escaped_cells", escaped},
          {"labels", {{"unresolved", kUnresolvedLabel}, {"escaped", kEscapedLabel}}}};
}

std::string basin_pgm(const BasinGrid& basin) {
  int maxval = 1;
  for (int label : basin.labels) maxval = std::max(maxval, label + 2);
  std::string out = fmt::format("P2\n{} {}\n{}\n", basin.grid.nx, basin.grid.ny, maxval);
  for (int j = basin.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < basin.grid.nx; ++i) {
      const int label = basin.label(i, j);
      const int value = label == kUnresolvedLabel ? 0 : label == kEscapedLabel ? 1 : label + 2;
      out += fmt::format("{}", value);
      out += i + 1 < basin.grid.nx ? ' ' : '\n';
    }
  }
  return out;
}

}  // namespace hysteresis
