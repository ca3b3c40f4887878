#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace onramp {

// All quantities are SI: meters, seconds, m/s, m/s^2. Times are absolute
// simulation seconds. Position 0 is the control-zone entry, the merging zone
// spans [control_zone_length, control_zone_length + merging_zone_length).

struct RoadGeometry {
  double control_zone_length = 150.0;
  double merging_zone_length = 30.0;
  double v_min = 0.0;
  double v_max = 25.0;
  double u_min = -3.0;
  double u_max = 3.0;

  double merge_entry() const { return control_zone_length; }
  double merge_exit() const { return control_zone_length + merging_zone_length; }

  bool operator==(const RoadGeometry&) const = default;
};

/// Geometry and limits of the highway on-ramp experiment.
RoadGeometry paper_geometry();

/// Distance needed to accelerate from `v0` to v_max at u_max.
double acceleration_distance(const RoadGeometry& g, double v0);

/// Violated geometry invariants, empty when the geometry is usable. Includes
/// the check that the control zone is long enough to reach v_max from v_min.
std::vector<std::string> check_geometry(const RoadGeometry& g);

enum class Origin { Highway, Ramp };

std::string_view to_string(Origin origin);
std::optional<Origin> parse_origin(std::string_view text);

struct PlatoonParams {
  int id = 0;
  Origin origin = Origin::Highway;
  double weight = 1.0;
  int size = 1;
  double headway = 1.0;
  double arrival_time = 0.0;
  double initial_speed = 0.0;
};

class InvalidPlatoon : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A platoon as the scheduler sees it: leader plus `size - 1` followers at a
/// constant time headway. Construction validates every field against the
/// geometry, so a Platoon value is always admissible.
class Platoon {
 public:
  Platoon(const PlatoonParams& params, const RoadGeometry& geometry);

  int id() const { return p_.id; }
  Origin origin() const { return p_.origin; }
  double weight() const { return p_.weight; }
  int size() const { return p_.size; }
  double headway() const { return p_.headway; }
  /// Time the leader enters the control zone (position 0).
  double arrival_time() const { return p_.arrival_time; }
  double initial_speed() const { return p_.initial_speed; }
  const PlatoonParams& params() const { return p_; }

 private:
  PlatoonParams p_;
};

struct VehicleState {
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

inline constexpr double kKinematicTolerance = 1e-9;

/// True when speed and accel respect the geometry limits within
/// kKinematicTolerance.
bool within_limits(const VehicleState& s, const RoadGeometry& g);

struct SizeRange {
  int min = 1;
  int max = 1;
  double mean() const { return 0.5 * (min + max); }
  bool operator==(const SizeRange&) const = default;
};

struct ScenarioConfig {
  RoadGeometry geometry;
  double safe_time_gap = 1.0;
  double headway = 1.0;
  double highway_volume = 1060.0;
  double ramp_volume = 450.0;
  SizeRange highway_platoon_size_range{1, 5};
  SizeRange ramp_platoon_size_range{1, 3};
  double highway_weight = 2.0;
  double ramp_weight = 1.0;
  double sim_duration = 900.0;
  double time_step = 0.1;
  std::uint64_t rng_seed = 1;
  /// Initial speeds are drawn uniformly from [fraction * v_max, v_max].
  double initial_speed_min_fraction = 0.8;
  /// Road upstream of the control zone on which platoons are announced and
  /// may absorb schedule delay. Zero means platoons appear at the control
  /// zone entry.
  double approach_length = 0.0;

  double weight_for(Origin origin) const {
    return origin == Origin::Highway ? highway_weight : ramp_weight;
  }

  bool operator==(const ScenarioConfig&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_scenario(const ScenarioConfig& cfg);

}  // namespace onramp
