#include "onramp/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace onramp {

double entry_time(double initial_speed, const RoadGeometry& g) {
  const double v0 = initial_speed;
  if (!(v0 <= g.v_max))
    throw ScheduleError(fmt::format("initial speed {} exceeds v_max {}", v0, g.v_max));
  if (!(v0 >= 0.0)) throw ScheduleError(fmt::format("initial speed {} is negative", v0));
  if (v0 == g.v_max) return g.control_zone_length / g.v_max;

  const double t_a = (g.v_max - v0) / g.u_max;
  const double d_a = acceleration_distance(g, v0);
  if (d_a > g.control_zone_length)
    throw ScheduleError(fmt::format(
        "control zone of {} m is too short to reach v_max from {} m/s (needs {} m)",
        g.control_zone_length, v0, d_a));
  return t_a + (g.control_zone_length - d_a) / g.v_max;
}

double entry_time(const Platoon& p, const RoadGeometry& g) {
  return entry_time(p.initial_speed(), g);
}

double exit_time(const Platoon& p, const RoadGeometry& g, double safe_gap) {
  return g.merging_zone_length / g.v_max + (p.size() - 1) * p.headway() + safe_gap;
}

double completion_ratio(const PlatoonTiming& t, double weight) {
  if (!(weight > 0.0))
    throw ScheduleError(fmt::format("platoon {}: weight must be > 0 (got {})", t.platoon_id, weight));
  return t.t_c / weight;
}

PlatoonTiming compute_timing(const Platoon& p, const RoadGeometry& g, double safe_gap) {
  PlatoonTiming t;
  t.platoon_id = p.id();
  t.t_in = entry_time(p, g);
  t.t_out = exit_time(p, g, safe_gap);
  t.t_c = t.t_in + t.t_out;
  t.ratio = completion_ratio(t, p.weight());
  return t;
}

std::vector<int> MergeSchedule::sequence() const {
  std::vector<int> ids;
  ids.reserve(slots.size());
  for (const auto& s : slots) ids.push_back(s.platoon_id);
  return ids;
}

const ScheduledPlatoon* MergeSchedule::find(int platoon_id) const {
  auto it = std::find_if(slots.begin(), slots.end(),
                         [platoon_id](const auto& s) { return s.platoon_id == platoon_id; });
  return it == slots.end() ? nullptr : &*it;
}

const ScheduledPlatoon& MergeSchedule::at(int platoon_id) const {
  if (const auto* s = find(platoon_id)) return *s;
  throw ScheduleError(fmt::format("platoon {} is not in the schedule", platoon_id));
}

namespace {

void check_batch(std::span<const Platoon> platoons, double safe_gap, double t_last_leave) {
  if (platoons.empty()) throw ScheduleError("cannot schedule an empty batch");
  if (!(safe_gap >= 0.0)) throw ScheduleError("safe time gap must be >= 0");
  if (!(t_last_leave >= 0.0)) throw ScheduleError("t_last_leave must be >= 0");
  std::set<int> ids;
  for (const auto& p : platoons)
    if (!ids.insert(p.id()).second)
      throw ScheduleError(fmt::format("duplicate platoon id {}", p.id()));
}

std::vector<PlatoonTiming> timings_for(std::span<const Platoon> platoons, const RoadGeometry& g,
                                       double safe_gap) {
  std::vector<PlatoonTiming> out;
  out.reserve(platoons.size());
  for (const auto& p : platoons) out.push_back(compute_timing(p, g, safe_gap));
  return out;
}

}  // namespace

std::vector<std::size_t> ratio_order(std::span<const Platoon> platoons,
                                     std::span<const PlatoonTiming> timings) {
  std::vector<std::size_t> order(platoons.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (timings[a].ratio != timings[b].ratio) return timings[a].ratio < timings[b].ratio;
    const bool ha = platoons[a].origin() == Origin::Highway;
    const bool hb = platoons[b].origin() == Origin::Highway;
    if (ha != hb) return ha;
    return platoons[a].id() < platoons[b].id();
  });
  return order;
}

MergeSchedule chain_sequence(std::span<const Platoon> platoons,
                             std::span<const std::size_t> order,
                             std::span<const double> release,
                             const RoadGeometry& g, double safe_gap, double t_last_leave) {
  MergeSchedule s;
  s.slots.reserve(order.size());
  double machine_free = t_last_leave;
  for (std::size_t idx : order) {
    const Platoon& p = platoons[idx];
    ScheduledPlatoon slot;
    slot.platoon_id = p.id();
    slot.origin = p.origin();
    slot.weight = p.weight();
    slot.timing = compute_timing(p, g, safe_gap);
    slot.earliest_entry = release[idx];
    slot.t_m = std::max(release[idx], machine_free);
    slot.t_l = slot.t_m + slot.timing.t_out;
    machine_free = slot.t_l;
    s.slots.push_back(slot);
  }
  return s;
}

MergeSchedule build_schedule_with_release(std::span<const Platoon> platoons,
                                          std::span<const double> release,
                                          const RoadGeometry& g, double safe_gap,
                                          double t_last_leave) {
  check_batch(platoons, safe_gap, t_last_leave);
  if (release.size() != platoons.size())
    throw ScheduleError("release times must match the platoon batch");
  const auto timings = timings_for(platoons, g, safe_gap);
  const auto order = ratio_order(platoons, timings);
  return chain_sequence(platoons, order, release, g, safe_gap, t_last_leave);
}

namespace {

std::vector<double> releases_at(std::span<const Platoon> platoons, const RoadGeometry& g,
                                double now) {
  std::vector<double> release;
  release.reserve(platoons.size());
  for (const auto& p : platoons) release.push_back(std::max(now, p.arrival_time()) + entry_time(p, g));
  return release;
}

}  // namespace

MergeSchedule build_schedule(std::span<const Platoon> platoons, const RoadGeometry& g,
                             double safe_gap, double now, double t_last_leave) {
  if (!(now >= 0.0)) throw ScheduleError("current time must be >= 0");
  check_batch(platoons, safe_gap, t_last_leave);
  const auto release = releases_at(platoons, g, now);
  return build_schedule_with_release(platoons, release, g, safe_gap, t_last_leave);
}

double total_weighted_completion(const MergeSchedule& s, double now) {
  double total = 0.0;
  for (const auto& slot : s.slots) total += slot.weight * (slot.t_l - now);
  return total;
}

OracleResult brute_force_best_sequence(std::span<const Platoon> platoons, const RoadGeometry& g,
                                       double safe_gap, double now, double t_last_leave) {
  if (platoons.size() > kMaxOraclePlatoons)
    throw ScheduleError(fmt::format("brute-force oracle handles at most {} platoons (got {})",
                                    kMaxOraclePlatoons, platoons.size()));
  if (!(now >= 0.0)) throw ScheduleError("current time must be >= 0");
  check_batch(platoons, safe_gap, t_last_leave);
  const auto release = releases_at(platoons, g, now);

  // Permuting indices sorted by id enumerates id sequences lexicographically.
  std::vector<std::size_t> order(platoons.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return platoons[a].id() < platoons[b].id(); });

  OracleResult best;
  bool have_best = false;
  do {
    const auto s = chain_sequence(platoons, order, release, g, safe_gap, t_last_leave);
    const double twc = total_weighted_completion(s, now);
    if (!have_best || twc < best.total_weighted_completion) {
      best.sequence = s.sequence();
      best.total_weighted_completion = twc;
      have_best = true;
    }
  } while (std::next_permutation(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return platoons[a].id() < platoons[b].id();
  }));
  return best;
}

void write_schedule_csv(std::ostream& out, const MergeSchedule& s) {
  out << "platoon_id,origin,weight,t_in,t_out,t_c,ratio,t_m,t_l,sequence_position\n";
  int position = 1;
  for (const auto& slot : s.slots) {
    const auto& t = slot.timing;
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", slot.platoon_id, to_string(slot.origin),
               slot.weight, t.t_in, t.t_out, t.t_c, t.ratio, slot.t_m, slot.t_l, position++);
  }
}

}  // namespace onramp
