#include "onramp/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

namespace onramp {

namespace {

constexpr double kDomainSlack = 1e-9;
constexpr double kJoinTolerance = 1e-9;

}  // namespace

VehicleState Segment::state_at(double t) const {
  const double tau = t - t_start;
  return VehicleState{position(tau), speed()(tau), control()(tau)};
}

double Segment::control_effort() const {
  // u(tau) = u0 + u1 tau
  const Cubic u = control();
  const double u0 = u.c[0];
  const double u1 = u.c[1];
  const double h = duration();
  return 0.5 * (u0 * u0 * h + u0 * u1 * h * h + u1 * u1 * h * h * h / 3.0);
}

Segment constant_accel_segment(double t_start, double t_end, double p, double v, double accel) {
  return Segment{t_start, t_end, Cubic{{p, v, 0.5 * accel, 0.0}}};
}

std::string_view to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::TimeOptimal: return "time_optimal";
    case PlanKind::EnergyOptimal: return "energy_optimal";
    case PlanKind::Baseline: return "baseline";
  }
  return "unknown";
}

TrajectoryPlan::TrajectoryPlan(PlanKind kind, std::vector<Segment> segments,
                               double merge_entry_time)
    : kind_(kind), segments_(std::move(segments)), tm_(merge_entry_time) {
  if (segments_.empty()) throw PlanError(PlanError::Reason::InvalidInput, "plan has no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.t_end >= s.t_start))
      throw PlanError(PlanError::Reason::InvalidInput,
                      fmt::format("segment {} ends before it starts", i));
    if (i == 0) continue;
    const auto& prev = segments_[i - 1];
    if (prev.t_end != s.t_start)
      throw PlanError(PlanError::Reason::InvalidInput,
                      fmt::format("segments {} and {} are not contiguous", i - 1, i));
    const auto a = prev.state_at(prev.t_end);
    const auto b = s.state_at(s.t_start);
    if (std::abs(a.position - b.position) > kJoinTolerance ||
        std::abs(a.speed - b.speed) > kJoinTolerance)
      throw PlanError(PlanError::Reason::InvalidInput,
                      fmt::format("plan is discontinuous at t = {}", s.t_start));
  }
}

VehicleState TrajectoryPlan::eval(double t) const {
  if (t < t0() - kDomainSlack || t > end() + kDomainSlack || std::isnan(t))
    throw PlanError(PlanError::Reason::OutOfDomain,
                    fmt::format("t = {} outside plan domain [{}, {}]", t, t0(), end()));
  t = std::clamp(t, t0(), end());
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const Segment& s) { return x < s.t_start; });
  if (it != segments_.begin()) --it;
  return it->state_at(t);
}

std::optional<double> TrajectoryPlan::time_at_position(double p) const {
  if (segments_.front().position.c[0] >= p) return t0();
  for (const auto& s : segments_) {
    const double h = s.duration();
    if (s.position(h) < p) continue;
    double lo = 0.0;
    double hi = h;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (s.position(mid) < p ? lo : hi) = mid;
    }
    return s.t_start + hi;
  }
  return std::nullopt;
}

double TrajectoryPlan::control_effort() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.control_effort();
  return total;
}

TrajectoryPlan TrajectoryPlan::spliced(double t, std::vector<Segment> tail, PlanKind kind,
                                       double merge_entry_time) const {
  if (t < t0() || t > end())
    throw PlanError(PlanError::Reason::OutOfDomain,
                    fmt::format("splice time {} outside plan domain [{}, {}]", t, t0(), end()));
  std::vector<Segment> out;
  for (const auto& s : segments_) {
    if (s.t_start >= t) break;
    out.push_back(s);
    if (out.back().t_end > t) out.back().t_end = t;
  }
  out.insert(out.end(), tail.begin(), tail.end());
  return TrajectoryPlan(kind, std::move(out), merge_entry_time);
}

TrajectoryPlan TrajectoryPlan::prepended(const Segment& head) const {
  std::vector<Segment> out;
  out.reserve(segments_.size() + 1);
  out.push_back(head);
  out.insert(out.end(), segments_.begin(), segments_.end());
  return TrajectoryPlan(kind_, std::move(out), tm_);
}

TrajectoryPlan time_optimal_plan(double v0, const RoadGeometry& g, double t0) {
  if (!(v0 <= g.v_max) || !(v0 >= 0.0))
    throw PlanError(PlanError::Reason::InvalidInput,
                    fmt::format("initial speed {} outside [0, v_max = {}]", v0, g.v_max));
  const double length = g.control_zone_length;
  std::vector<Segment> segs;
  if (v0 == g.v_max) {
    const double tm = t0 + length / g.v_max;
    segs.push_back(constant_accel_segment(t0, tm, 0.0, g.v_max, 0.0));
    return TrajectoryPlan(PlanKind::TimeOptimal, std::move(segs), tm);
  }
  const double t_a = (g.v_max - v0) / g.u_max;
  const double d_a = acceleration_distance(g, v0);
  if (d_a > length)
    throw PlanError(PlanError::Reason::InvalidInput,
                    fmt::format("control zone of {} m is too short to reach v_max from {} m/s",
                                length, v0));
  const double t_switch = t0 + t_a;
  const double tm = t_switch + (length - d_a) / g.v_max;
  auto accel = constant_accel_segment(t0, t_switch, 0.0, v0, g.u_max);
  const auto at_switch = accel.state_at(t_switch);
  segs.push_back(accel);
  segs.push_back(constant_accel_segment(t_switch, tm, at_switch.position, g.v_max, 0.0));
  return TrajectoryPlan(PlanKind::TimeOptimal, std::move(segs), tm);
}

Segment linear_control_segment(const BoundaryState& from, const BoundaryState& to) {
  const double h = to.t - from.t;
  if (!(h > 0.0))
    throw PlanError(PlanError::Reason::Singular,
                    fmt::format("horizon must be positive (t0 = {}, tm = {})", from.t, to.t));
  const double dist = to.position - from.position;
  const double v0 = from.speed;
  const double vf = to.speed;
  // u(tau) = b + a tau with p(h) = dist, v(h) = vf.
  const double a = (6.0 * (v0 + vf) * h - 12.0 * dist) / (h * h * h);
  const double b = (vf - v0) / h - 0.5 * a * h;
  return Segment{from.t, to.t, Cubic{{from.position, v0, 0.5 * b, a / 6.0}}};
}

std::vector<std::string> limit_violations(const Segment& s, const RoadGeometry& g) {
  std::vector<std::string> out;
  constexpr double eps = kKinematicTolerance;
  const double h = s.duration();
  const Cubic u = s.control();
  for (double tau : {0.0, h}) {
    const double val = u(tau);
    if (val < g.u_min - eps || val > g.u_max + eps)
      out.push_back(fmt::format("control {:.6g} m/s^2 at t = {:.6g} outside [{}, {}]", val,
                                s.t_start + tau, g.u_min, g.u_max));
  }
  const Cubic v = s.speed();
  std::vector<double> probes{0.0, h};
  // v is quadratic: v(tau) = v0 + b tau + (a/2) tau^2, stationary where u = 0.
  if (u.c[1] != 0.0) {
    const double vertex = -u.c[0] / u.c[1];
    if (vertex > 0.0 && vertex < h) probes.push_back(vertex);
  }
  for (double tau : probes) {
    const double val = v(tau);
    if (val < g.v_min - eps || val > g.v_max + eps)
      out.push_back(fmt::format("speed {:.6g} m/s at t = {:.6g} outside [{}, {}]", val,
                                s.t_start + tau, g.v_min, g.v_max));
  }
  return out;
}

Segment energy_optimal_segment(const BoundaryState& from, const BoundaryState& to,
                               const RoadGeometry& g) {
  auto seg = linear_control_segment(from, to);
  if (auto bad = limit_violations(seg, g); !bad.empty())
    throw PlanError(PlanError::Reason::ConstraintViolation,
                    fmt::format("energy-optimal trajectory leaves the admissible set: {}",
                                fmt::join(bad, "; ")));
  return seg;
}

TrajectoryPlan energy_optimal_plan(double v0, const RoadGeometry& g, double t0, double tm) {
  if (!(v0 >= g.v_min) || !(v0 <= g.v_max))
    throw PlanError(PlanError::Reason::InvalidInput,
                    fmt::format("initial speed {} outside [{}, {}]", v0, g.v_min, g.v_max));
  auto seg = energy_optimal_segment(BoundaryState{t0, 0.0, v0},
                                    BoundaryState{tm, g.control_zone_length, g.v_max}, g);
  return TrajectoryPlan(PlanKind::EnergyOptimal, {seg}, tm);
}

EnergyConstants energy_constants(double v0, const RoadGeometry& g, double t0, double tm) {
  const auto seg =
      linear_control_segment(BoundaryState{t0, 0.0, v0}, BoundaryState{tm, g.control_zone_length, g.v_max});
  // Local cubic: p = p0 + v0 tau + (B/2) tau^2 + (A/6) tau^3 with tau = t - t0.
  const double p0 = seg.position.c[0];
  const double big_b = 2.0 * seg.position.c[2];
  const double big_a = 6.0 * seg.position.c[3];
  EnergyConstants k;
  k.a = big_a;
  k.b = big_b - big_a * t0;
  k.c = v0 - big_b * t0 + 0.5 * big_a * t0 * t0;
  k.d = p0 - v0 * t0 + 0.5 * big_b * t0 * t0 - big_a * t0 * t0 * t0 / 6.0;
  return k;
}

TrajectoryPlan plan_for_schedule(const Platoon& p, const MergeSchedule& s, const RoadGeometry& g) {
  const auto* slot = s.find(p.id());
  if (slot == nullptr)
    throw PlanError(PlanError::Reason::InvalidInput,
                    fmt::format("platoon {} is not in the schedule", p.id()));
  const double t0 = p.arrival_time();
  const double earliest = t0 + slot->timing.t_in;
  if (slot->t_m < earliest - 1e-9)
    throw PlanError(PlanError::Reason::InvalidInput,
                    fmt::format("platoon {} scheduled at {} before its earliest entry {}", p.id(),
                                slot->t_m, earliest));
  auto plan = std::abs(slot->t_m - earliest) <= 1e-9
                  ? time_optimal_plan(p.initial_speed(), g, t0)
                  : energy_optimal_plan(p.initial_speed(), g, t0, slot->t_m);
  const auto at_entry = plan.eval(plan.tm());
  return plan.spliced(plan.tm(),
                      {constant_accel_segment(plan.tm(), std::max(slot->t_l, plan.tm()),
                                              at_entry.position, at_entry.speed, 0.0)},
                      plan.kind(), plan.tm());
}

void write_plan_csv(std::ostream& out, const TrajectoryPlan& plan, double dt) {
  if (!(dt > 0.0)) throw PlanError(PlanError::Reason::InvalidInput, "sample step must be positive");
  out << "t,position,speed,accel\n";
  const auto n = static_cast<long>(std::floor((plan.end() - plan.t0()) / dt + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = plan.t0() + static_cast<double>(k) * dt;
    const auto s = plan.eval(t);
    fmt::print(out, "{},{},{},{}\n", t, s.position, s.speed, s.accel);
  }
}

}  // namespace onramp
