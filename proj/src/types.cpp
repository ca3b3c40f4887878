#include "onramp/types.hpp"

#include <cmath>

#include <fmt/format.h>

namespace onramp {

RoadGeometry paper_geometry() {
  return RoadGeometry{.control_zone_length = 150.0,
                      .merging_zone_length = 30.0,
                      .v_min = 0.0,
                      .v_max = 25.0,
                      .u_min = -3.0,
                      .u_max = 3.0};
}

double acceleration_distance(const RoadGeometry& g, double v0) {
  return (g.v_max * g.v_max - v0 * v0) / (2.0 * g.u_max);
}

std::vector<std::string> check_geometry(const RoadGeometry& g) {
  std::vector<std::string> out;
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(g.control_zone_length) || g.control_zone_length <= 0.0)
    out.push_back(fmt::format("control_zone_length must be > 0 (got {})",
                              g.control_zone_length));
  if (!finite(g.merging_zone_length) || g.merging_zone_length <= 0.0)
    out.push_back(fmt::format("merging_zone_length must be > 0 (got {})",
                              g.merging_zone_length));
  if (!finite(g.v_min) || g.v_min < 0.0)
    out.push_back(fmt::format("v_min must be >= 0 (got {})", g.v_min));
  if (!finite(g.v_max) || !(g.v_min < g.v_max))
    out.push_back(fmt::format("speed band is empty: need v_min < v_max (got {} and {})",
                              g.v_min, g.v_max));
  if (!finite(g.u_min) || g.u_min >= 0.0)
    out.push_back(fmt::format("u_min must be < 0 (got {})", g.u_min));
  if (!finite(g.u_max) || g.u_max <= 0.0)
    out.push_back(fmt::format("u_max must be > 0 (got {})", g.u_max));
  if (out.empty()) {
    const double needed = acceleration_distance(g, g.v_min);
    if (g.control_zone_length < needed)
      out.push_back(fmt::format(
          "control zone too short to reach v_max: control_zone_length {} < "
          "(v_max^2 - v_min^2)/(2 u_max) = {:.6g}",
          g.control_zone_length, needed));
  }
  return out;
}

std::string_view to_string(Origin origin) {
  return origin == Origin::Highway ? "highway" : "ramp";
}

std::optional<Origin> parse_origin(std::string_view text) {
  if (text == "highway" || text == "Highway" || text == "H") return Origin::Highway;
  if (text == "ramp" || text == "Ramp" || text == "R") return Origin::Ramp;
  return std::nullopt;
}

Platoon::Platoon(const PlatoonParams& params, const RoadGeometry& geometry)
    : p_(params) {
  if (p_.id <= 0)
    throw InvalidPlatoon(fmt::format("platoon id must be positive (got {})", p_.id));
  if (p_.size < 1)
    throw InvalidPlatoon(fmt::format("platoon {}: size must be >= 1 (got {})", p_.id, p_.size));
  if (!(p_.headway > 0.0) || !std::isfinite(p_.headway))
    throw InvalidPlatoon(
        fmt::format("platoon {}: headway must be > 0 (got {})", p_.id, p_.headway));
  if (!(p_.weight > 0.0) || !std::isfinite(p_.weight))
    throw InvalidPlatoon(
        fmt::format("platoon {}: weight must be > 0 (got {})", p_.id, p_.weight));
  if (!std::isfinite(p_.arrival_time))
    throw InvalidPlatoon(fmt::format("platoon {}: arrival_time is not finite", p_.id));
  if (!(p_.initial_speed >= geometry.v_min) || !(p_.initial_speed <= geometry.v_max))
    throw InvalidPlatoon(fmt::format(
        "platoon {}: initial_speed {} outside [v_min, v_max] = [{}, {}]", p_.id,
        p_.initial_speed, geometry.v_min, geometry.v_max));
}

bool within_limits(const VehicleState& s, const RoadGeometry& g) {
  constexpr double eps = kKinematicTolerance;
  return s.accel >= g.u_min - eps && s.accel <= g.u_max + eps &&
         s.speed >= g.v_min - eps && s.speed <= g.v_max + eps;
}

ValidationReport validate_scenario(const ScenarioConfig& cfg) {
  ValidationReport report;
  report.violations = check_geometry(cfg.geometry);
  auto& v = report.violations;
  if (!(cfg.time_step > 0.0))
    v.push_back(fmt::format("time_step must be > 0 (got {})", cfg.time_step));
  if (!(cfg.sim_duration > 0.0))
    v.push_back(fmt::format("sim_duration must be > 0 (got {})", cfg.sim_duration));
  if (!(cfg.safe_time_gap >= 0.0))
    v.push_back(fmt::format("safe_time_gap must be >= 0 (got {})", cfg.safe_time_gap));
  if (!(cfg.headway > 0.0))
    v.push_back(fmt::format("headway must be > 0 (got {})", cfg.headway));
  if (!(cfg.highway_volume >= 0.0))
    v.push_back(fmt::format("highway_volume must be >= 0 (got {})", cfg.highway_volume));
  if (!(cfg.ramp_volume >= 0.0))
    v.push_back(fmt::format("ramp_volume must be >= 0 (got {})", cfg.ramp_volume));
  for (auto [name, r] : {std::pair{"highway_platoon_size_range", cfg.highway_platoon_size_range},
                         std::pair{"ramp_platoon_size_range", cfg.ramp_platoon_size_range}}) {
    if (r.min < 1 || r.max < r.min)
      v.push_back(fmt::format("{} must satisfy 1 <= min <= max (got {},{})", name, r.min, r.max));
  }
  if (!(cfg.highway_weight > 0.0))
    v.push_back(fmt::format("highway_weight must be > 0 (got {})", cfg.highway_weight));
  if (!(cfg.ramp_weight > 0.0))
    v.push_back(fmt::format("ramp_weight must be > 0 (got {})", cfg.ramp_weight));
  if (!(cfg.initial_speed_min_fraction > 0.0) || cfg.initial_speed_min_fraction > 1.0)
    v.push_back(fmt::format("initial_speed_min_fraction must be in (0, 1] (got {})",
                            cfg.initial_speed_min_fraction));
  else if (cfg.initial_speed_min_fraction * cfg.geometry.v_max < cfg.geometry.v_min)
    v.push_back("initial speed range extends below v_min");
  if (report.ok() && cfg.initial_speed_min_fraction > 0.0 && cfg.initial_speed_min_fraction <= 1.0) {
    // Same-road platoons must fit one behind the other through the merging zone.
    const auto& g = cfg.geometry;
    const double v_lo = cfg.initial_speed_min_fraction * g.v_max;
    const double spread = (g.v_max - v_lo) / g.u_max - acceleration_distance(g, v_lo) / g.v_max;
    const auto check = [&](const char* road, double vph, SizeRange r) {
      if (!(vph > 0.0)) return;
      const double mean_gap = 3600.0 * r.mean() / vph;
      const double min_gap = g.merging_zone_length / g.v_max + (r.mean() - 1.0) * cfg.headway +
                             cfg.safe_time_gap + spread;
      if (!(mean_gap > min_gap))
        v.push_back(fmt::format("{} of {} vph exceeds the single-lane platoon capacity of {:.1f} vph",
                                road, vph, 3600.0 * r.mean() / min_gap));
    };
    check("highway_volume", cfg.highway_volume, cfg.highway_platoon_size_range);
    check("ramp_volume", cfg.ramp_volume, cfg.ramp_platoon_size_range);
  }
  if (!(cfg.approach_length >= 0.0))
    v.push_back(fmt::format("approach_length must be >= 0 (got {})", cfg.approach_length));
  return report;
}

}  // namespace onramp
