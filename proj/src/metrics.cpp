#include "onramp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "onramp/scheduler.hpp"

namespace onramp {

namespace {

constexpr double kExitSlack = 1e-6;

VehicleMetrics measure(int platoon_id, int vehicle, std::vector<const TrajectorySample*>& rows,
                       const ScenarioConfig& cfg) {
  const auto& g = cfg.geometry;
  std::sort(rows.begin(), rows.end(),
            [](const TrajectorySample* a, const TrajectorySample* b) { return a->time < b->time; });
  const auto& first = *rows.front();
  const auto& last = *rows.back();
  if (last.position < g.merge_exit() - kExitSlack)
    throw MetricsError(fmt::format(
        "platoon {} vehicle {}: log ends at t = {} with position {} before the merging-zone exit",
        platoon_id, vehicle, last.time, last.position));
  if (!(first.speed > 0.0))
    throw MetricsError(fmt::format("platoon {} vehicle {}: first row has no speed", platoon_id, vehicle));

  VehicleMetrics m;
  m.platoon_id = platoon_id;
  m.vehicle_index = vehicle;
  const double nominal_entry = first.time - first.position / first.speed;
  m.travel_time = last.time - nominal_entry;
  m.free_flow_time = entry_time(first.speed, g) + g.merging_zone_length / g.v_max;
  m.delay = m.travel_time - m.free_flow_time;
  if (std::abs(m.delay) < 1e-9) m.delay = 0.0;

  bool in_stop = false;
  double run = 0.0;
  const auto close_run = [&] {
    if (in_stop && run >= cfg.time_step - 1e-9) ++m.stops;
    in_stop = false;
    run = 0.0;
  };
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double dt = rows[k + 1]->time - rows[k]->time;
    const auto& r = *rows[k];
    m.fuel_proxy += 0.5 * r.accel * r.accel * dt;
    if (r.speed < kStopSpeed) {
      m.stopped_delay += dt;
      in_stop = true;
      run += dt;
    } else {
      close_run();
    }
  }
  close_run();
  return m;
}

MetricSummary summarize(std::span<const VehicleMetrics> vs) {
  MetricSummary s;
  if (vs.empty()) return s;
  for (const auto& v : vs) {
    s.avg_delay += v.delay;
    s.avg_stopped_delay += v.stopped_delay;
    s.avg_stops += v.stops;
    s.avg_travel_time += v.travel_time;
    s.fuel_proxy += v.fuel_proxy;
  }
  const double n = static_cast<double>(vs.size());
  s.avg_delay /= n;
  s.avg_stopped_delay /= n;
  s.avg_stops /= n;
  s.avg_travel_time /= n;
  s.fuel_proxy /= n;
  return s;
}

}  // namespace

std::vector<VehicleMetrics> vehicle_metrics(std::span<const TrajectorySample> log,
                                            const ScenarioConfig& cfg) {
  std::map<std::pair<int, int>, std::vector<const TrajectorySample*>> by_vehicle;
  for (const auto& r : log) by_vehicle[{r.platoon_id, r.vehicle_index}].push_back(&r);
  std::vector<VehicleMetrics> out;
  out.reserve(by_vehicle.size());
  for (auto& [key, rows] : by_vehicle) out.push_back(measure(key.first, key.second, rows, cfg));
  return out;
}

RunMetrics compute_metrics(std::span<const TrajectorySample> log, const ScenarioConfig& cfg) {
  const auto vs = vehicle_metrics(log, cfg);
  RunMetrics m;
  static_cast<MetricSummary&>(m) = summarize(vs);
  m.vehicles = static_cast<int>(vs.size());
  for (std::size_t b = 0; b < vs.size();) {
    std::size_t e = b;
    while (e < vs.size() && vs[e].platoon_id == vs[b].platoon_id) ++e;
    PlatoonMetrics pm;
    static_cast<MetricSummary&>(pm) = summarize(std::span(vs).subspan(b, e - b));
    pm.platoon_id = vs[b].platoon_id;
    pm.vehicles = static_cast<int>(e - b);
    m.per_platoon.push_back(pm);
    b = e;
  }
  return m;
}

RunMetrics average_runs(std::span<const RunMetrics> runs) {
  RunMetrics m;
  if (runs.empty()) return m;
  for (const auto& r : runs) {
    m.avg_delay += r.avg_delay;
    m.avg_stopped_delay += r.avg_stopped_delay;
    m.avg_stops += r.avg_stops;
    m.avg_travel_time += r.avg_travel_time;
    m.fuel_proxy += r.fuel_proxy;
    m.vehicles += r.vehicles;
  }
  const double n = static_cast<double>(runs.size());
  m.avg_delay /= n;
  m.avg_stopped_delay /= n;
  m.avg_stops /= n;
  m.avg_travel_time /= n;
  m.fuel_proxy /= n;
  return m;
}

ComparisonReport compare_runs(const RunMetrics& proposed, const RunMetrics& baseline) {
  ComparisonReport report;
  const auto row = [&](const char* name, double MetricSummary::*field) {
    ComparisonRow r{name, proposed.*field, baseline.*field, std::nullopt};
    if (r.baseline != 0.0) r.reduction_pct = 100.0 * (r.baseline - r.proposed) / r.baseline;
    report.push_back(r);
  };
  row("avg_delay", &MetricSummary::avg_delay);
  row("avg_stopped_delay", &MetricSummary::avg_stopped_delay);
  row("avg_stops", &MetricSummary::avg_stops);
  row("avg_travel_time", &MetricSummary::avg_travel_time);
  row("fuel_proxy", &MetricSummary::fuel_proxy);
  return report;
}

namespace {

nlohmann::ordered_json summary_json(const MetricSummary& s) {
  nlohmann::ordered_json j;
  j["avg_delay"] = s.avg_delay;
  j["avg_stopped_delay"] = s.avg_stopped_delay;
  j["avg_stops"] = s.avg_stops;
  j["avg_travel_time"] = s.avg_travel_time;
  j["fuel_proxy"] = s.fuel_proxy;
  return j;
}

}  // namespace

void write_metrics_json(std::ostream& out, const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["vehicles"] = m.vehicles;
  j["units"] = {{"avg_delay", "s/vehicle"},
                {"avg_stopped_delay", "s/vehicle"},
                {"avg_stops", "stops/vehicle"},
                {"avg_travel_time", "s/vehicle"},
                {"fuel_proxy", "(m/s^2)^2*s per vehicle, 0.5*integral of u^2 dt"}};
  j.update(summary_json(m));
  auto per = nlohmann::ordered_json::array();
  for (const auto& p : m.per_platoon) {
    nlohmann::ordered_json e;
    e["platoon_id"] = p.platoon_id;
    e["vehicles"] = p.vehicles;
    e.update(summary_json(p));
    per.push_back(e);
  }
  j["per_platoon"] = per;
  out << j.dump(2) << '\n';
}

void write_metrics_csv_header(std::ostream& out) {
  out << "policy,seed,vehicles,avg_delay,avg_stopped_delay,avg_stops,avg_travel_time,fuel_proxy\n";
}

void write_metrics_csv_row(std::ostream& out, std::string_view policy, std::uint64_t seed,
                           const RunMetrics& m) {
  fmt::print(out, "{},{},{},{},{},{},{},{}\n", policy, seed, m.vehicles, m.avg_delay,
             m.avg_stopped_delay, m.avg_stops, m.avg_travel_time, m.fuel_proxy);
}

void write_comparison_csv(std::ostream& out, const ComparisonReport& report) {
  out << "metric,proposed,baseline,reduction_pct\n";
  for (const auto& r : report) {
    fmt::print(out, "{},{},{},{}\n", r.metric, r.proposed, r.baseline,
               r.reduction_pct ? fmt::format("{:.2f}", *r.reduction_pct) : std::string("n/a"));
  }
}

}  // namespace onramp
