#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "onramp/simulator.hpp"
#include "onramp/types.hpp"

namespace onramp {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kStopSpeed = 0.1;  // m/s

struct VehicleMetrics {
  int platoon_id = 0;
  int vehicle_index = 0;
  double travel_time = 0.0;     // control-zone entry (as scheduled on arrival) to merging-zone exit
  double free_flow_time = 0.0;  // same distance, time-optimal, unobstructed
  double delay = 0.0;
  double stopped_delay = 0.0;
  int stops = 0;
  double fuel_proxy = 0.0;  // 0.5 * sum u^2 dt
};

/// Averages per vehicle. Used both for a whole run and for one platoon.
struct MetricSummary {
  double avg_delay = 0.0;
  double avg_stopped_delay = 0.0;
  double avg_stops = 0.0;
  double avg_travel_time = 0.0;
  double fuel_proxy = 0.0;
};

struct PlatoonMetrics : MetricSummary {
  int platoon_id = 0;
  int vehicles = 0;
};

struct RunMetrics : MetricSummary {
  int vehicles = 0;
  std::vector<PlatoonMetrics> per_platoon;
};

/// Per-vehicle measures from a trajectory log. Rows may come in any order;
/// each vehicle's rows are sorted by time before use. Throws MetricsError
/// when a vehicle's last row has not left the merging zone.
std::vector<VehicleMetrics> vehicle_metrics(std::span<const TrajectorySample> log,
                                            const ScenarioConfig& cfg);

RunMetrics compute_metrics(std::span<const TrajectorySample> log, const ScenarioConfig& cfg);

/// Mean of the aggregate fields over runs; per_platoon is left empty.
RunMetrics average_runs(std::span<const RunMetrics> runs);

struct ComparisonRow {
  std::string metric;
  double proposed = 0.0;
  double baseline = 0.0;
  std::optional<double> reduction_pct;  // empty when the baseline value is 0
};

using ComparisonReport = std::vector<ComparisonRow>;

ComparisonReport compare_runs(const RunMetrics& proposed, const RunMetrics& baseline);

void write_metrics_json(std::ostream& out, const RunMetrics& m);
void write_metrics_csv_header(std::ostream& out);
void write_metrics_csv_row(std::ostream& out, std::string_view policy, std::uint64_t seed,
                           const RunMetrics& m);
void write_comparison_csv(std::ostream& out, const ComparisonReport& report);

}  // namespace onramp
