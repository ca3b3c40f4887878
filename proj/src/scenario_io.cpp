#include "onramp/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace onramp {

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}", line, message) : message),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view v, int line, std::string_view key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(line, fmt::format("{}: expected a number, got '{}'", key, v));
  return out;
}

template <typename Int>
Int to_int(std::string_view v, int line, std::string_view key) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(line, fmt::format("{}: expected an integer, got '{}'", key, v));
  return out;
}

SizeRange to_range(std::string_view v, int line, std::string_view key) {
  const auto sep = v.find(',');
  if (sep == std::string_view::npos)
    throw ConfigError(line, fmt::format("{}: expected 'min,max', got '{}'", key, v));
  return SizeRange{to_int<int>(trim(v.substr(0, sep)), line, key),
                   to_int<int>(trim(v.substr(sep + 1)), line, key)};
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, int)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    auto real = [&t](const char* key, double ScenarioConfig::*field) {
      t[key] = [field, key](ScenarioConfig& c, std::string_view v, int line) {
        c.*field = to_double(v, line, key);
      };
    };
    auto geo = [&t](const char* key, double RoadGeometry::*field) {
      t[key] = [field, key](ScenarioConfig& c, std::string_view v, int line) {
        c.geometry.*field = to_double(v, line, key);
      };
    };
    geo("control_zone_length", &RoadGeometry::control_zone_length);
    geo("merging_zone_length", &RoadGeometry::merging_zone_length);
    geo("v_min", &RoadGeometry::v_min);
    geo("v_max", &RoadGeometry::v_max);
    geo("u_min", &RoadGeometry::u_min);
    geo("u_max", &RoadGeometry::u_max);
    real("safe_time_gap", &ScenarioConfig::safe_time_gap);
    real("headway", &ScenarioConfig::headway);
    real("highway_volume", &ScenarioConfig::highway_volume);
    real("ramp_volume", &ScenarioConfig::ramp_volume);
    real("highway_weight", &ScenarioConfig::highway_weight);
    real("ramp_weight", &ScenarioConfig::ramp_weight);
    real("sim_duration", &ScenarioConfig::sim_duration);
    real("time_step", &ScenarioConfig::time_step);
    real("initial_speed_min_fraction", &ScenarioConfig::initial_speed_min_fraction);
    real("approach_length", &ScenarioConfig::approach_length);
    t["highway_platoon_size_range"] = [](ScenarioConfig& c, std::string_view v, int line) {
      c.highway_platoon_size_range = to_range(v, line, "highway_platoon_size_range");
    };
    t["ramp_platoon_size_range"] = [](ScenarioConfig& c, std::string_view v, int line) {
      c.ramp_platoon_size_range = to_range(v, line, "ramp_platoon_size_range");
    };
    t["rng_seed"] = [](ScenarioConfig& c, std::string_view v, int line) {
      c.rng_seed = to_int<std::uint64_t>(v, line, "rng_seed");
    };
    return t;
  }();
  return table;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(line_no, fmt::format("expected 'key = value', got '{}'", line));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(line_no, fmt::format("unknown key '{}'", key));
    if (auto [prev, inserted] = seen.emplace(std::string(key), line_no); !inserted)
      throw ConfigError(line_no, fmt::format("duplicate key '{}' (first set on line {})", key,
                                             prev->second));
    if (value.empty()) throw ConfigError(line_no, fmt::format("{}: missing value", key));
    it->second(cfg, value, line_no);
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const ScenarioConfig& c) {
  const auto& g = c.geometry;
  std::string out;
  auto kv = [&out](std::string_view k, auto v) { out += fmt::format("{} = {}\n", k, v); };
  kv("control_zone_length", g.control_zone_length);
  kv("merging_zone_length", g.merging_zone_length);
  kv("v_min", g.v_min);
  kv("v_max", g.v_max);
  kv("u_min", g.u_min);
  kv("u_max", g.u_max);
  kv("safe_time_gap", c.safe_time_gap);
  kv("headway", c.headway);
  kv("highway_volume", c.highway_volume);
  kv("ramp_volume", c.ramp_volume);
  kv("highway_platoon_size_range",
     fmt::format("{},{}", c.highway_platoon_size_range.min, c.highway_platoon_size_range.max));
  kv("ramp_platoon_size_range",
     fmt::format("{},{}", c.ramp_platoon_size_range.min, c.ramp_platoon_size_range.max));
  kv("highway_weight", c.highway_weight);
  kv("ramp_weight", c.ramp_weight);
  kv("sim_duration", c.sim_duration);
  kv("time_step", c.time_step);
  kv("rng_seed", c.rng_seed);
  kv("initial_speed_min_fraction", c.initial_speed_min_fraction);
  kv("approach_length", c.approach_length);
  return out;
}

}  // namespace onramp
