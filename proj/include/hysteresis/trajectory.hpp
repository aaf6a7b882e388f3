#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hysteresis/model.hpp"
#include "hysteresis/ode.hpp"

namespace hysteresis {

enum class TrajectoryStatus { Completed, BlewUp };

/// Samples on a uniform output grid. Bishop trajectories use Dim = 4 with
/// state (Re x, Im x, Re v, Im v); Reid trajectories use Dim = 2 with (x, v).
template <int Dim>
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector<Dim>> states;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::optional<double> blowup_time;
  StepStats stats;

  std::size_t size() const { return times.size(); }
};

using BishopTrajectory = Trajectory<4>;
using ReidTrajectory = Trajectory<2>;

template <int Dim>
using SegmentObserver = std::function<bool(const StepSegment<Dim>&)>;

inline StateVector<4> pack(const BishopState& s) {
  return {s.x.real(), s.x.imag(), s.v.real(), s.v.imag()};
}
inline BishopState unpack_bishop(const StateVector<4>& y) {
  return {Complex(y[0], y[1]), Complex(y[2], y[3])};
}
inline StateVector<2> pack(const ReidState& s) { return {s.x, s.v}; }

/// Low-level drivers: every accepted step segment goes to `observer`, which
/// returns false to stop. The Reid driver never lets a segment straddle a
/// sign change of x or v.
StepStats integrate_bishop_segments(const ModelSpec& spec, const BishopState& initial, double t0,
                                    double t_end, const IntegratorConfig& cfg,
                                    const SegmentObserver<4>& observer);
StepStats integrate_reid_segments(const ModelSpec& spec, const ReidState& initial, double t0,
                                  double t_end, const IntegratorConfig& cfg,
                                  const SegmentObserver<2>& observer);

/// Uniformly sampled trajectory, stopped at the first sample with
/// |x| >= cfg.blowup_threshold.
BishopTrajectory integrate(const ModelSpec& spec, const BishopState& initial,
                           const IntegratorConfig& cfg);
ReidTrajectory integrate(const ModelSpec& spec, const ReidState& initial,
                         const IntegratorConfig& cfg);
ReidTrajectory integrate_reid(const ModelSpec& spec, const ReidState& initial,
                              const IntegratorConfig& cfg);

/// Reid model with sgn(x v) replaced by tanh(x v / delta), integrated
/// without event handling. Only meant for cross-checking the event driver.
ReidTrajectory integrate_reid_smoothed(const ModelSpec& spec, const ReidState& initial,
                                       const IntegratorConfig& cfg, double delta);

/// Earliest output time where |x_numeric - x_reference| > 1, or the blow-up
/// time, or nothing when the two agree up to cfg.t_end. The reference is the
/// analytic solution for bishop-linear (the initial state must lie on its
/// decaying branch) and the Fourier attractor for the nonlinear variants,
/// compared only after a transient of 20 / (w1 b).
std::optional<double> measure_blowup_time(const ModelSpec& spec, const BishopState& initial,
                                          const IntegratorConfig& cfg);

/// CSV with header t,re_x,im_x,re_v,im_v (Bishop) or t,x,v (Reid). When
/// `error` is non-empty an abs_err column is appended.
std::string trajectory_csv(const BishopTrajectory& traj, const std::vector<double>& error = {});
std::string trajectory_csv(const ReidTrajectory& traj);

template <int Dim>
nlohmann::json trajectory_sidecar(const Trajectory<Dim>& traj) {
  nlohmann::json j;
  j["status"] = traj.status == TrajectoryStatus::Completed ? "completed" : "blew-up";
  j["blowup_time"] = traj.blowup_time ? nlohmann::json(*traj.blowup_time) : nlohmann::json(nullptr);
  j["samples"] = traj.size();
  j["steps_accepted"] = traj.stats.accepted;
  j["steps_rejected"] = traj.stats.rejected;
  j["rhs_evaluations"] = traj.stats.rhs_evaluations;
  j["events"] = traj.stats.events;
  return j;
}

}  // namespace hysteresis
