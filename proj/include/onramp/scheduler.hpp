#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "onramp/types.hpp"

namespace onramp {

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlatoonTiming {
  int platoon_id = 0;
  double t_in = 0.0;   // control-zone entry to earliest merging-zone entry
  double t_out = 0.0;  // merging-zone occupancy, safe gap included
  double t_c = 0.0;    // t_in + t_out
  double ratio = 0.0;  // t_c / weight
};

/// Earliest travel time from the control-zone entry to the merging zone:
/// cruise at v_max, or accelerate at u_max up to v_max and then cruise.
/// Throws ScheduleError when the speed exceeds v_max or the control zone is
/// too short to reach v_max.
double entry_time(double initial_speed, const RoadGeometry& g);
double entry_time(const Platoon& p, const RoadGeometry& g);

/// Merging-zone occupancy: L_MZ / v_max + (size - 1) * headway + safe_gap.
double exit_time(const Platoon& p, const RoadGeometry& g, double safe_gap);

/// t_c / weight. Throws ScheduleError for a non-positive weight.
double completion_ratio(const PlatoonTiming& t, double weight);

PlatoonTiming compute_timing(const Platoon& p, const RoadGeometry& g, double safe_gap);

struct ScheduledPlatoon {
  int platoon_id = 0;
  Origin origin = Origin::Highway;
  double weight = 1.0;
  PlatoonTiming timing;
  double earliest_entry = 0.0;  // absolute, the release of this job
  double t_m = 0.0;             // absolute merging-zone entry
  double t_l = 0.0;             // absolute merging-zone release, t_m + t_out
};

/// Merging-zone slots in service order. `slots[i]` is the i-th platoon of
/// the sequence; each slot starts no earlier than its release and no earlier
/// than the previous slot's leave time.
struct MergeSchedule {
  std::vector<ScheduledPlatoon> slots;

  std::vector<int> sequence() const;
  const ScheduledPlatoon* find(int platoon_id) const;
  const ScheduledPlatoon& at(int platoon_id) const;
};

/// Orders platoons by non-decreasing t_c / weight. Ties go to highway
/// platoons first, then to the lower id. Returns indices into `platoons`.
std::vector<std::size_t> ratio_order(std::span<const Platoon> platoons,
                                     std::span<const PlatoonTiming> timings);

/// Chains the platoons in the given order through the merging zone. Each
/// platoon enters at max(release, previous leave) and leaves t_out later; the
/// first platoon waits for `t_last_leave`.
MergeSchedule chain_sequence(std::span<const Platoon> platoons,
                             std::span<const std::size_t> order,
                             std::span<const double> release,
                             const RoadGeometry& g, double safe_gap, double t_last_leave);

/// Optimal sequence and merging-zone schedule for a batch of platoons.
///
/// A platoon cannot enter before max(now, arrival_time) + t_in; for platoons
/// that already arrived this is now + t_in. `t_last_leave` is the leave time
/// of the last platoon committed before this batch (0 if none).
MergeSchedule build_schedule(std::span<const Platoon> platoons, const RoadGeometry& g,
                             double safe_gap, double now, double t_last_leave);

/// Same sequencing rule with explicit per-platoon releases (absolute
/// earliest merging-zone entry), used when platoons are rescheduled while
/// already travelling.
MergeSchedule build_schedule_with_release(std::span<const Platoon> platoons,
                                          std::span<const double> release,
                                          const RoadGeometry& g, double safe_gap,
                                          double t_last_leave);

/// Sum of weight * (t_l - now) over the schedule, summed in sequence order.
double total_weighted_completion(const MergeSchedule& s, double now);

struct OracleResult {
  std::vector<int> sequence;
  double total_weighted_completion = 0.0;
};

inline constexpr std::size_t kMaxOraclePlatoons = 9;

/// Exhaustive search over every service order under chain_sequence
/// semantics. Ties keep the lexicographically smallest id sequence. Throws
/// ScheduleError for more than kMaxOraclePlatoons platoons.
OracleResult brute_force_best_sequence(std::span<const Platoon> platoons, const RoadGeometry& g,
                                       double safe_gap, double now, double t_last_leave);

/// CSV with header `platoon_id,origin,weight,t_in,t_out,t_c,ratio,t_m,t_l,sequence_position`.
void write_schedule_csv(std::ostream& out, const MergeSchedule& s);

}  // namespace onramp
