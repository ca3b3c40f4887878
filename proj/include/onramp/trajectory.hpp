#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "onramp/scheduler.hpp"
#include "onramp/types.hpp"

namespace onramp {

class PlanError : public std::runtime_error {
 public:
  enum class Reason { InvalidInput, Singular, ConstraintViolation, OutOfDomain };
  PlanError(Reason reason, const std::string& message)
      : std::runtime_error(message), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

/// Cubic in local time: c[0] + c[1] tau + c[2] tau^2 + c[3] tau^3.
struct Cubic {
  std::array<double, 4> c{};

  double operator()(double tau) const { return c[0] + tau * (c[1] + tau * (c[2] + tau * c[3])); }
  Cubic derivative() const { return Cubic{{c[1], 2.0 * c[2], 3.0 * c[3], 0.0}}; }
};

/// One polynomial piece of a trajectory, parameterized by tau = t - t_start.
/// Speed and control are the derivatives of the position cubic, so the
/// kinematic identities hold exactly.
struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  Cubic position;

  Cubic speed() const { return position.derivative(); }
  Cubic control() const { return position.derivative().derivative(); }
  double duration() const { return t_end - t_start; }
  VehicleState state_at(double t) const;
  /// 0.5 * integral of u^2 over the segment, in closed form.
  double control_effort() const;
};

/// Segment with constant control `accel` starting from (p, v) at t_start.
Segment constant_accel_segment(double t_start, double t_end, double p, double v, double accel);

enum class PlanKind { TimeOptimal, EnergyOptimal, Baseline };
std::string_view to_string(PlanKind kind);

/// Piecewise-polynomial leader trajectory. Segments are contiguous in time
/// and continuous in position and speed. `merge_entry_time()` is the time the
/// plan reaches the merging zone; the plan may continue past it.
class TrajectoryPlan {
 public:
  TrajectoryPlan(PlanKind kind, std::vector<Segment> segments, double merge_entry_time);

  PlanKind kind() const { return kind_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double t0() const { return segments_.front().t_start; }
  double tm() const { return tm_; }
  double end() const { return segments_.back().t_end; }

  /// State at t. Times within 1e-9 s outside [t0, end] are clamped; anything
  /// further out throws PlanError(OutOfDomain).
  VehicleState eval(double t) const;

  /// First time the position reaches `p`, assuming speed never goes negative.
  std::optional<double> time_at_position(double p) const;

  double control_effort() const;

  /// Keeps this plan on [t0, t] and continues with `tail`, which must start
  /// at t from the state this plan has there.
  TrajectoryPlan spliced(double t, std::vector<Segment> tail, PlanKind kind,
                         double merge_entry_time) const;

  /// Same path with an extra segment on the front.
  TrajectoryPlan prepended(const Segment& head) const;

 private:
  PlanKind kind_;
  std::vector<Segment> segments_;
  double tm_;
};

/// Maximum acceleration until v_max, then cruise until the merging zone.
/// tm - t0 equals entry_time(v0). Throws PlanError for v0 > v_max or a
/// control zone too short to reach v_max.
TrajectoryPlan time_optimal_plan(double v0, const RoadGeometry& g, double t0);

/// Constants of p(t) = a t^3/6 + b t^2/2 + c t + d in absolute time.
struct EnergyConstants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

struct BoundaryState {
  double t = 0.0;
  double position = 0.0;
  double speed = 0.0;
};

/// Linear-control segment joining two boundary states. No limit checks.
Segment linear_control_segment(const BoundaryState& from, const BoundaryState& to);

/// Limits violated by a segment, empty when it is admissible.
std::vector<std::string> limit_violations(const Segment& s, const RoadGeometry& g);

/// Minimum-effort segment between two boundary states with linear control.
/// Throws PlanError(Singular) for a non-positive horizon and
/// PlanError(ConstraintViolation) if the result leaves the speed or control
/// limits anywhere on the horizon.
Segment energy_optimal_segment(const BoundaryState& from, const BoundaryState& to,
                               const RoadGeometry& g);

/// Energy-optimal approach from (t0, 0, v0) to the merging zone at tm,
/// arriving at v_max.
TrajectoryPlan energy_optimal_plan(double v0, const RoadGeometry& g, double t0, double tm);
EnergyConstants energy_constants(double v0, const RoadGeometry& g, double t0, double tm);

/// Time-optimal plan if the platoon enters the merging zone at its earliest
/// time, energy-optimal otherwise, followed by a v_max cruise over [t_m, t_l].
TrajectoryPlan plan_for_schedule(const Platoon& p, const MergeSchedule& s, const RoadGeometry& g);

inline VehicleState eval(const TrajectoryPlan& plan, double t) { return plan.eval(t); }

/// CSV `t,position,speed,accel` sampled every `dt` from t0 to the plan end.
void write_plan_csv(std::ostream& out, const TrajectoryPlan& plan, double dt);

}  // namespace onramp
