#include "onramp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "onramp/scheduler.hpp"

namespace onramp {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::PlatoonArrival: return "PlatoonArrival";
    case EventKind::MergeEntry: return "MergeEntry";
    case EventKind::MergeExit: return "MergeExit";
    case EventKind::Reschedule: return "Reschedule";
  }
  return "Unknown";
}

namespace {

constexpr double kEps = 1e-9;
constexpr double kStopStandoff = 0.5;   // ramp stop line sits this far before the merging zone
constexpr double kHoldHorizon = 1e5;    // length of the "wait at the stop line" segment
constexpr double kDrainLimit = 3600.0;  // run past sim_duration before giving up

struct Active {
  std::size_t rec = 0;
  const Platoon* platoon = nullptr;
  std::optional<TrajectoryPlan> plan;
  bool on_nominal = true;  // still on the cruise that reaches the control zone at arrival_time
  bool scheduled = false;
  double t_m = 0.0;
  double t_l = 0.0;
  bool committed = false;  // baseline ramp platoon released from the stop line
  bool entered = false;
  std::optional<double> leader_exit;
  std::optional<double> release;  // last follower exit + t_g
};

/// Shortest time to reach the merging zone from (p, v) at full acceleration.
double earliest_to_go(double p, double v, const RoadGeometry& g) {
  const double dist = g.control_zone_length - p;
  if (dist <= 0.0) return 0.0;
  const double d_a = acceleration_distance(g, v);
  if (d_a <= dist) return (g.v_max - v) / g.u_max + (dist - d_a) / g.v_max;
  return (-v + std::sqrt(v * v + 2.0 * g.u_max * dist)) / g.u_max;
}

/// Accelerate at u_max to v_max from `from`, then cruise until `until` past
/// the end of the merging zone.
std::vector<Segment> go_segments(const BoundaryState& from, const RoadGeometry& g, double until) {
  std::vector<Segment> segs;
  double t = from.t;
  double p = from.position;
  if (from.speed < g.v_max) {
    const double t_a = (g.v_max - from.speed) / g.u_max;
    segs.push_back(constant_accel_segment(t, t + t_a, p, from.speed, g.u_max));
    p = segs.back().state_at(t + t_a).position;
    t += t_a;
  }
  const double remaining = std::max(g.merge_exit() - p, 0.0);
  segs.push_back(constant_accel_segment(t, t + remaining / g.v_max + until, p, g.v_max, 0.0));
  return segs;
}

class Engine {
 public:
  Engine(const ScenarioConfig& cfg, std::span<const Platoon> arrivals, bool proposed)
      : cfg_(cfg), g_(cfg.geometry), dt_(cfg.time_step), proposed_(proposed) {
    if (auto report = validate_scenario(cfg); !report.ok())
      throw SimulationAbort(fmt::format("invalid scenario: {}", report.violations.front()));
    platoons_.assign(arrivals.begin(), arrivals.end());
    std::sort(platoons_.begin(), platoons_.end(),
              [](const Platoon& a, const Platoon& b) { return a.id() < b.id(); });
    for (std::size_t i = 1; i < platoons_.size(); ++i)
      if (platoons_[i].id() == platoons_[i - 1].id())
        throw SimulationAbort(fmt::format("duplicate platoon id {}", platoons_[i].id()));
    for (const auto& p : platoons_) {
      PlatoonRecord r{p};
      r.appear_time = appear_time(p, cfg_);
      records_.push_back(r);
    }
    plans_.resize(platoons_.size());
    order_.resize(platoons_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return records_[a].appear_time < records_[b].appear_time;
    });
    if (!proposed_) precompute_highway();
  }

  SimulationResult run() {
    std::size_t next = 0;
    long k = order_.empty()
                 ? 0
                 : static_cast<long>(std::floor(records_[order_.front()].appear_time / dt_));
    double t = static_cast<double>(k) * dt_;
    while (true) {
      t = static_cast<double>(k) * dt_;
      while (next < order_.size() && records_[order_[next]].appear_time <= t + 1e-12) {
        appear(order_[next]);
        ++next;
      }
      if (!proposed_) release_ramp_heads(t);
      step(t);
      if (next == order_.size() && active_.empty()) break;
      if (t > cfg_.sim_duration + kDrainLimit)
        throw SimulationAbort(fmt::format("{} platoons still in the network at t = {}",
                                          active_.size(), t));
      ++k;
    }
    SimulationResult out;
    out.events = std::move(events_);
    out.platoons = std::move(records_);
    out.end_time = t;
    out.trajectory = build_log(out.platoons);
    return out;
  }

 private:
  // ---- shared --------------------------------------------------------------

  void appear(std::size_t idx) {
    const Platoon& p = platoons_[idx];
    const double now = records_[idx].appear_time;
    events_.push_back(SimEvent{now, EventKind::PlatoonArrival, p.id()});
    Active a;
    a.rec = idx;
    a.platoon = &p;
    active_.push_back(a);
    if (proposed_) {
      reschedule(now);
    } else if (p.origin() == Origin::Highway) {
      active_.back().plan = highway_plan(p, now);
    } else {
      active_.back().plan = yield_plan(p, now);
      ramp_queue_.push_back(p.id());
      release_ramp_heads(now);
    }
  }

  BoundaryState appearance_state(const Platoon& p, double now) const {
    return BoundaryState{now, -cfg_.approach_length, p.initial_speed()};
  }

  std::vector<Segment> approach_cruise(const Platoon& p, double now, double p0) const {
    std::vector<Segment> segs;
    if (p.arrival_time() > now)
      segs.push_back(constant_accel_segment(now, p.arrival_time(), p0, p.initial_speed(), 0.0));
    return segs;
  }

  double vehicle_offset(const Platoon& p, int i) const { return i * p.headway(); }

  void step(double t) {
    std::set<int> occupants;
    for (auto& a : active_) {
      const Platoon& p = *a.platoon;
      const auto& plan = *a.plan;
      auto& rec = records_[a.rec];
      for (int i = 0; i < p.size(); ++i) {
        const double shift = vehicle_offset(p, i);
        if (t < rec.appear_time + shift - kEps) break;
        if (a.leader_exit && t > *a.leader_exit + shift + kEps) continue;
        const auto s = plan.eval(t - shift);
        if (!within_limits(s, g_))
          throw SimulationAbort(fmt::format(
              "platoon {} vehicle {} outside limits at t = {}: speed {}, accel {}", p.id(), i, t,
              s.speed, s.accel));
        if (s.position >= g_.merge_entry() && s.position < g_.merge_exit()) occupants.insert(p.id());
      }

      const auto leader = a.leader_exit ? VehicleState{g_.merge_exit(), g_.v_max, 0.0} : plan.eval(t);
      if (!a.entered && leader.position >= g_.merge_entry()) {
        a.entered = true;
        rec.merge_entry_step = t;
        rec.occupancy_start = *plan.time_at_position(g_.merge_entry());
        events_.push_back(SimEvent{t, EventKind::MergeEntry, p.id()});
        if (proposed_ && std::abs(t - a.t_m) > dt_ + kEps)
          throw SimulationAbort(fmt::format("platoon {} entered the merging zone at {} but was "
                                            "scheduled for {}",
                                            p.id(), t, a.t_m));
      }
      if (!a.leader_exit && leader.position >= g_.merge_exit())
        a.leader_exit = *plan.time_at_position(g_.merge_exit());
      if (a.leader_exit && !a.release) {
        const double last_exit = *a.leader_exit + vehicle_offset(p, p.size() - 1);
        if (t >= last_exit) {
          rec.occupancy_end = last_exit;
          a.release = last_exit + cfg_.safe_time_gap;
        }
      }
    }
    if (occupants.size() > 1)
      throw SimulationAbort(fmt::format("merging zone shared by platoons {} at t = {}",
                                        fmt::join(occupants, ", "), t));

    for (auto it = active_.begin(); it != active_.end();) {
      if (it->release && t >= *it->release - kEps) {
        events_.push_back(SimEvent{t, EventKind::MergeExit, it->platoon->id()});
        if (proposed_ && std::abs(t - it->t_l) > dt_ + kEps)
          throw SimulationAbort(fmt::format("platoon {} released the merging zone at {} but was "
                                            "scheduled for {}",
                                            it->platoon->id(), t, it->t_l));
        finished_last_leave_ = std::max(finished_last_leave_, *it->release);
        plans_[it->rec] = std::move(it->plan);
        it = active_.erase(it);
      } else {
        ++it;
      }
    }
  }

  // ---- proposed policy -----------------------------------------------------

  /// Plan reaching the merging zone at v_max exactly at t_m and cruising to
  /// t_l, starting from the platoon's state at `now`.
  std::optional<TrajectoryPlan> plan_to(const Active& a, double now, double t_m, double t_l,
                                        bool& nominal) const {
    const Platoon& p = *a.platoon;
    const BoundaryState from = a.plan ? [&] {
      const auto s = a.plan->eval(now);
      return BoundaryState{now, s.position, s.speed};
    }()
                                      : appearance_state(p, now);
    const Segment merge_cruise =
        constant_accel_segment(t_m, t_l, g_.merge_entry(), g_.v_max, 0.0);
    const auto finish = [&](std::vector<Segment> tail, PlanKind kind) {
      tail.push_back(merge_cruise);
      return a.plan ? a.plan->spliced(now, std::move(tail), kind, t_m)
                    : TrajectoryPlan(kind, std::move(tail), t_m);
    };

    if (a.on_nominal && now <= p.arrival_time()) {
      try {
        const double earliest = p.arrival_time() + entry_time(p, g_);
        const auto zone = std::abs(t_m - earliest) <= kEps
                              ? time_optimal_plan(p.initial_speed(), g_, p.arrival_time())
                              : energy_optimal_plan(p.initial_speed(), g_, p.arrival_time(), t_m);
        auto tail = approach_cruise(p, now, from.position);
        tail.insert(tail.end(), zone.segments().begin(), zone.segments().end());
        nominal = true;
        return finish(std::move(tail), zone.kind());
      } catch (const PlanError&) {
      }
    }

    const double fastest = now + earliest_to_go(from.position, from.speed, g_);
    if (t_m < fastest - kEps) return std::nullopt;
    nominal = false;
    try {
      if (t_m <= fastest + kEps) {
        if (acceleration_distance(g_, from.speed) > g_.merge_entry() - from.position)
          return std::nullopt;
        auto tail = go_segments(from, g_, 0.0);
        tail.back().t_end = t_m;
        if (tail.back().duration() <= 0.0) tail.pop_back();
        return finish(std::move(tail), PlanKind::TimeOptimal);
      }
      auto seg = energy_optimal_segment(from, BoundaryState{t_m, g_.merge_entry(), g_.v_max}, g_);
      return finish({seg}, PlanKind::EnergyOptimal);
    } catch (const PlanError&) {
      return std::nullopt;
    }
  }

  struct Update {
    Active* a;
    double t_m;
    double t_l;
    std::optional<TrajectoryPlan> plan;
    bool nominal;
  };

  /// Schedules `batch` after every other scheduled platoon and plans the
  /// platoons whose slot moved. Empty if any of them cannot make its slot.
  std::optional<std::vector<Update>> try_batch(const std::vector<Active*>& batch, double now,
                                               std::string& failure) const {
    double t_last_leave = finished_last_leave_;
    for (const auto& a : active_)
      if (a.scheduled && std::find(batch.begin(), batch.end(), &a) == batch.end())
        t_last_leave = std::max(t_last_leave, a.t_l);

    std::vector<Platoon> jobs;
    std::vector<double> release;
    for (const Active* a : batch) {
      const Platoon& p = *a->platoon;
      double r = p.arrival_time() + entry_time(p, g_);
      if (a->plan) {
        const auto s = a->plan->eval(now);
        r = std::max(r, now + earliest_to_go(s.position, s.speed, g_));
      }
      jobs.push_back(p);
      release.push_back(r);
    }
    const auto schedule =
        build_schedule_with_release(jobs, release, g_, cfg_.safe_time_gap, t_last_leave);

    std::vector<Update> updates;
    for (Active* a : batch) {
      const auto& slot = schedule.at(a->platoon->id());
      if (a->scheduled && std::abs(slot.t_m - a->t_m) <= kEps) {
        updates.push_back(Update{a, slot.t_m, slot.t_l, std::nullopt, a->on_nominal});
        continue;
      }
      bool nominal = a->on_nominal;
      auto plan = plan_to(*a, now, slot.t_m, slot.t_l, nominal);
      if (!plan) {
        failure = fmt::format("platoon {} cannot reach the merging zone at t_m = {}",
                              a->platoon->id(), slot.t_m);
        return std::nullopt;
      }
      updates.push_back(Update{a, slot.t_m, slot.t_l, std::move(plan), nominal});
    }
    return updates;
  }

  /// Reschedules after `newcomer` appears. Platoons entering within one step
  /// keep their slots. The others are ordered by their current t_m; for each
  /// split point the earlier ones keep their slots and the rest are
  /// rescheduled together with the newcomer. The feasible split with the
  /// least total weighted leave time wins.
  void reschedule(double now) {
    Active& newcomer = active_.back();
    std::vector<Active*> candidates;
    for (auto& a : active_)
      if (a.scheduled && a.t_m > now + dt_) candidates.push_back(&a);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Active* x, const Active* y) { return x->t_m < y->t_m; });

    std::string failure;
    std::optional<std::vector<Update>> best;
    double best_cost = 0.0;
    for (std::size_t frozen = 0; frozen <= candidates.size(); ++frozen) {
      std::vector<Active*> batch(candidates.begin() + static_cast<long>(frozen), candidates.end());
      batch.push_back(&newcomer);
      auto updates = try_batch(batch, now, failure);
      if (!updates) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < frozen; ++i)
        cost += candidates[i]->platoon->weight() * candidates[i]->t_l;
      for (const auto& u : *updates) cost += u.a->platoon->weight() * u.t_l;
      if (!best || cost < best_cost - kEps) {
        best = std::move(updates);
        best_cost = cost;
      }
    }
    if (!best)
      throw SimulationAbort(fmt::format("no feasible schedule at t = {}: {}", now, failure));

    for (auto& u : *best) {
      auto& rec = records_[u.a->rec];
      u.a->scheduled = true;
      u.a->t_m = u.t_m;
      u.a->t_l = u.t_l;
      rec.scheduled_t_m = u.t_m;
      rec.scheduled_t_l = u.t_l;
      if (u.plan) {
        if (u.a->plan) ++rec.replans;
        u.a->plan = std::move(u.plan);
        u.a->on_nominal = u.nominal;
        rec.plan_kind = u.a->plan->kind();
      }
    }
    events_.push_back(SimEvent{now, EventKind::Reschedule, newcomer.platoon->id()});
  }

  // ---- baseline policy -----------------------------------------------------

  TrajectoryPlan highway_plan(const Platoon& p, double now) const {
    const auto zone = time_optimal_plan(p.initial_speed(), g_, p.arrival_time());
    auto segs = approach_cruise(p, now, -cfg_.approach_length);
    segs.insert(segs.end(), zone.segments().begin(), zone.segments().end());
    segs.push_back(constant_accel_segment(zone.tm(), zone.tm() + g_.merging_zone_length / g_.v_max + 1.0,
                                          g_.merge_entry(), g_.v_max, 0.0));
    return TrajectoryPlan(PlanKind::Baseline, std::move(segs), zone.tm());
  }

  void precompute_highway() {
    for (const auto& p : platoons_) {
      if (p.origin() != Origin::Highway) continue;
      const double entry = p.arrival_time() + entry_time(p, g_);
      const double exit =
          entry + g_.merging_zone_length / g_.v_max + (p.size() - 1) * p.headway();
      blocked_.emplace_back(entry, exit);
    }
  }

  TrajectoryPlan yield_plan(const Platoon& p, double now) const {
    const double v0 = p.initial_speed();
    const double stop = g_.merge_entry() - kStopStandoff;
    const double brake_len = v0 * v0 / (2.0 * -g_.u_min);
    const double brake_at = stop - brake_len;
    const double p0 = -cfg_.approach_length;
    if (brake_at < p0)
      throw SimulationAbort(fmt::format("ramp platoon {} cannot stop before the merging zone",
                                        p.id()));
    std::vector<Segment> segs;
    double t = now;
    if (v0 > 0.0) {
      const double t_b = t + (brake_at - p0) / v0;
      if (t_b > t) segs.push_back(constant_accel_segment(t, t_b, p0, v0, 0.0));
      const double t_s = t_b + v0 / -g_.u_min;
      segs.push_back(constant_accel_segment(t_b, t_s, brake_at, v0, g_.u_min));
      t = t_s;
    }
    segs.push_back(constant_accel_segment(t, t + kHoldHorizon, stop, 0.0, 0.0));
    return TrajectoryPlan(PlanKind::Baseline, std::move(segs), std::numeric_limits<double>::infinity());
  }

  TrajectoryPlan go_plan(const Active& a, double now) const {
    const Platoon& p = *a.platoon;
    if (now <= p.arrival_time()) {
      const auto s = a.plan->eval(now);
      auto tail = approach_cruise(p, now, s.position);
      const auto zone = time_optimal_plan(p.initial_speed(), g_, p.arrival_time());
      tail.insert(tail.end(), zone.segments().begin(), zone.segments().end());
      tail.push_back(constant_accel_segment(zone.tm(),
                                            zone.tm() + g_.merging_zone_length / g_.v_max + 1.0,
                                            g_.merge_entry(), g_.v_max, 0.0));
      return a.plan->spliced(now, std::move(tail), PlanKind::Baseline, zone.tm());
    }
    const auto s = a.plan->eval(now);
    auto tail = go_segments(BoundaryState{now, s.position, s.speed}, g_, 1.0);
    const auto draft = a.plan->spliced(now, std::move(tail), PlanKind::Baseline, now);
    return TrajectoryPlan(PlanKind::Baseline, draft.segments(),
                          *draft.time_at_position(g_.merge_entry()));
  }

  bool window_clear(double entry, double exit) const {
    const double tg = cfg_.safe_time_gap;
    const auto clear = [&](const std::pair<double, double>& o) {
      return exit + tg <= o.first + kEps || entry >= o.second + tg - kEps;
    };
    return std::all_of(blocked_.begin(), blocked_.end(), clear) &&
           std::all_of(committed_ramp_.begin(), committed_ramp_.end(), clear);
  }

  void release_ramp_heads(double now) {
    while (!ramp_queue_.empty()) {
      auto it = std::find_if(active_.begin(), active_.end(),
                             [&](const Active& a) { return a.platoon->id() == ramp_queue_.front(); });
      Active& a = *it;
      const auto s = a.plan->eval(now);
      if (s.position >= g_.merge_entry())
        throw SimulationAbort(fmt::format("ramp platoon {} passed the stop line uncommitted",
                                          a.platoon->id()));
      auto plan = go_plan(a, now);
      const double entry = *plan.time_at_position(g_.merge_entry());
      const double exit = *plan.time_at_position(g_.merge_exit()) +
                          (a.platoon->size() - 1) * a.platoon->headway();
      if (!window_clear(entry, exit)) return;
      a.plan = std::move(plan);
      a.committed = true;
      records_[a.rec].scheduled_t_m = entry;
      records_[a.rec].scheduled_t_l = exit + cfg_.safe_time_gap;
      committed_ramp_.emplace_back(entry, exit);
      ramp_queue_.erase(ramp_queue_.begin());
    }
  }

  // ---- output --------------------------------------------------------------

  std::vector<TrajectorySample> build_log(const std::vector<PlatoonRecord>& recs) const {
    std::vector<TrajectorySample> rows;
    for (std::size_t idx = 0; idx < platoons_.size(); ++idx) {
      const Platoon& p = platoons_[idx];
      const auto& plan = *plans_[idx];
      const double leader_exit = *plan.time_at_position(g_.merge_exit());
      const double appear = recs[idx].appear_time;
      for (int i = 0; i < p.size(); ++i) {
        const double shift = vehicle_offset(p, i);
        const double t0 = appear + shift;
        const double t1 = leader_exit + shift;
        std::vector<double> times{t0, t1};
        for (long k = static_cast<long>(std::floor(t0 / dt_)) + 1;; ++k) {
          const double t = static_cast<double>(k) * dt_;
          if (t >= t1) break;
          if (t > t0) times.push_back(t);
        }
        for (const auto& s : plan.segments()) {
          const double t = s.t_start + shift;
          if (t > t0 && t < t1) times.push_back(t);
        }
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        for (double t : times) {
          const auto s = plan.eval(t - shift);
          rows.push_back(TrajectorySample{t, p.id(), i, s.position, s.speed, s.accel});
        }
      }
    }
    std::sort(rows.begin(), rows.end(), [](const TrajectorySample& a, const TrajectorySample& b) {
      if (a.time != b.time) return a.time < b.time;
      if (a.platoon_id != b.platoon_id) return a.platoon_id < b.platoon_id;
      return a.vehicle_index < b.vehicle_index;
    });
    return rows;
  }

  const ScenarioConfig& cfg_;
  const RoadGeometry& g_;
  double dt_;
  bool proposed_;
  std::vector<Platoon> platoons_;
  std::vector<PlatoonRecord> records_;
  std::vector<std::optional<TrajectoryPlan>> plans_;
  std::vector<std::size_t> order_;
  std::vector<Active> active_;
  std::vector<SimEvent> events_;
  double finished_last_leave_ = 0.0;
  std::vector<std::pair<double, double>> blocked_;
  std::vector<std::pair<double, double>> committed_ramp_;
  std::vector<int> ramp_queue_;
};

}  // namespace

SimulationResult run_proposed(const ScenarioConfig& cfg, std::span<const Platoon> arrivals) {
  return Engine(cfg, arrivals, true).run();
}

SimulationResult run_proposed(const ScenarioConfig& cfg) {
  const auto arrivals = generate_arrivals(cfg);
  return run_proposed(cfg, arrivals);
}

SimulationResult run_baseline(const ScenarioConfig& cfg, std::span<const Platoon> arrivals) {
  return Engine(cfg, arrivals, false).run();
}

SimulationResult run_baseline(const ScenarioConfig& cfg) {
  const auto arrivals = generate_arrivals(cfg);
  return run_baseline(cfg, arrivals);
}

std::vector<std::pair<int, int>> occupancy_overlaps(const SimulationResult& r) {
  std::vector<const PlatoonRecord*> recs;
  for (const auto& p : r.platoons) recs.push_back(&p);
  std::sort(recs.begin(), recs.end(), [](const PlatoonRecord* a, const PlatoonRecord* b) {
    return a->occupancy_start < b->occupancy_start;
  });
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      if (recs[j]->occupancy_start >= recs[i]->occupancy_end) break;
      out.emplace_back(recs[i]->platoon.id(), recs[j]->platoon.id());
    }
  return out;
}

void write_events_csv(std::ostream& out, std::span<const SimEvent> events) {
  out << "time,kind,platoon_id\n";
  for (const auto& e : events) fmt::print(out, "{},{},{}\n", e.time, to_string(e.kind), e.platoon_id);
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> rows) {
  out << "time,platoon_id,vehicle_index,position,speed,accel\n";
  for (const auto& r : rows)
    fmt::print(out, "{},{},{},{},{},{}\n", r.time, r.platoon_id, r.vehicle_index, r.position,
               r.speed, r.accel);
}

}  // namespace onramp
