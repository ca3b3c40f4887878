#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "onramp/trajectory.hpp"
#include "onramp/types.hpp"

namespace onramp {

enum class EventKind { PlatoonArrival, MergeEntry, MergeExit, Reschedule };
std::string_view to_string(EventKind kind);

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::PlatoonArrival;
  int platoon_id = 0;

  bool operator==(const SimEvent&) const = default;
};

struct TrajectorySample {
  double time = 0.0;
  int platoon_id = 0;
  int vehicle_index = 0;  // 0 is the leader
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;

  bool operator==(const TrajectorySample&) const = default;
};

/// What happened to one platoon during a run.
struct PlatoonRecord {
  Platoon platoon;
  double appear_time = 0.0;  // leader appears at -approach_length
  double scheduled_t_m = 0.0;
  double scheduled_t_l = 0.0;
  double merge_entry_step = 0.0;  // first step with the leader in the merging zone
  double occupancy_start = 0.0;   // leader reaches the merging zone
  double occupancy_end = 0.0;     // last follower leaves it
  PlanKind plan_kind = PlanKind::Baseline;
  int replans = 0;
};

struct SimulationResult {
  std::vector<SimEvent> events;
  std::vector<TrajectorySample> trajectory;  // sorted by (time, platoon, vehicle)
  std::vector<PlatoonRecord> platoons;       // by platoon id
  double end_time = 0.0;
};

/// Invariant violation or unplannable platoon; the run cannot continue.
class SimulationAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Platoon arrivals on both roads in order of appearance, ids from 1.
///
/// Each road is a renewal process whose gap is the minimum same-road spacing
/// (the previous platoon's merging-zone occupancy plus the spread of entry
/// times) plus an exponential draw, with the exponential mean chosen so the
/// expected vehicle flow equals the configured volume. Sizes are uniform over
/// the configured range, initial speeds uniform in [fraction * v_max, v_max].
std::vector<Platoon> generate_arrivals(const ScenarioConfig& cfg, std::mt19937_64& rng);
std::vector<Platoon> generate_arrivals(const ScenarioConfig& cfg);

/// Time the leader appears on the approach road.
double appear_time(const Platoon& p, const ScenarioConfig& cfg);

SimulationResult run_proposed(const ScenarioConfig& cfg);
SimulationResult run_proposed(const ScenarioConfig& cfg, std::span<const Platoon> arrivals);

SimulationResult run_baseline(const ScenarioConfig& cfg);
SimulationResult run_baseline(const ScenarioConfig& cfg, std::span<const Platoon> arrivals);

/// Pairs of platoon ids whose merging-zone occupancy intervals overlap.
std::vector<std::pair<int, int>> occupancy_overlaps(const SimulationResult& r);

void write_events_csv(std::ostream& out, std::span<const SimEvent> events);
void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> rows);

}  // namespace onramp
