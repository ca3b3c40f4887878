#include "onramp/cli.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11/CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "onramp/metrics.hpp"
#include "onramp/scenario_io.hpp"
#include "onramp/scheduler.hpp"
#include "onramp/simulator.hpp"

namespace onramp::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError(fmt::format("cannot write '{}'", path.string()));
  return f;
}

std::string_view policy_name(bool proposed) { return proposed ? "proposed" : "baseline"; }

}  // namespace

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (auto part : split(text, ',')) {
    if (part.empty()) throw InputError(fmt::format("empty entry in seed list '{}'", text));
    if (const auto dots = part.find(".."); dots != std::string_view::npos) {
      std::uint64_t lo = 0;
      std::uint64_t hi = 0;
      if (!parse_number(part.substr(0, dots), lo) || !parse_number(part.substr(dots + 2), hi) ||
          hi < lo)
        throw InputError(fmt::format("bad seed range '{}'", part));
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::uint64_t s = 0;
      if (!parse_number(part, s)) throw InputError(fmt::format("bad seed '{}'", part));
      seeds.push_back(s);
    }
  }
  if (seeds.empty()) throw InputError("no seeds given");
  return seeds;
}

std::vector<Platoon> parse_platoon_csv(std::string_view text, const RoadGeometry& g) {
  static constexpr std::string_view kHeader =
      "id,origin,weight,size,headway,arrival_time,initial_speed";
  std::vector<Platoon> out;
  int line_no = 0;
  bool header_seen = false;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (!header_seen) {
      std::string joined;
      for (std::size_t i = 0; i < fields.size(); ++i)
        joined += (i ? "," : "") + std::string(fields[i]);
      if (joined != kHeader)
        throw InputError(fmt::format("line {}: expected header '{}'", line_no, kHeader));
      header_seen = true;
      continue;
    }
    if (fields.size() != 7)
      throw InputError(fmt::format("line {}: expected 7 fields, got {}", line_no, fields.size()));
    PlatoonParams p;
    const auto origin = parse_origin(fields[1]);
    if (!parse_number(fields[0], p.id) || !origin || !parse_number(fields[2], p.weight) ||
        !parse_number(fields[3], p.size) || !parse_number(fields[4], p.headway) ||
        !parse_number(fields[5], p.arrival_time) || !parse_number(fields[6], p.initial_speed))
      throw InputError(fmt::format("line {}: malformed platoon row '{}'", line_no, line));
    p.origin = *origin;
    try {
      out.emplace_back(p, g);
    } catch (const InvalidPlatoon& e) {
      throw InputError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (!header_seen) throw InputError("platoon file is empty");
  return out;
}

int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(req.scenario_path);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}: {}\n", req.scenario_path.string(), e.what());
    return kExitInvalid;
  }
  if (const auto report = validate_scenario(cfg); !report.ok()) {
    fmt::print(err, "error: scenario '{}' is invalid:\n", req.scenario_path.string());
    for (const auto& v : report.violations) fmt::print(err, "  - {}\n", v);
    return kExitInvalid;
  }
  if (req.seeds.empty()) {
    fmt::print(err, "error: no seeds given\n");
    return kExitInvalid;
  }

  std::error_code ec;
  std::filesystem::create_directories(req.output_dir, ec);
  if (ec) {
    fmt::print(err, "error: cannot create '{}': {}\n", req.output_dir.string(), ec.message());
    return kExitInvalid;
  }

  std::vector<bool> policies;
  if (req.policy != Policy::Baseline) policies.push_back(true);
  if (req.policy != Policy::Proposed) policies.push_back(false);

  std::vector<RunMetrics> proposed_runs;
  std::vector<RunMetrics> baseline_runs;
  try {
    auto summary = open_output(req.output_dir / "metrics.csv");
    write_metrics_csv_header(summary);
    for (const auto seed : req.seeds) {
      cfg.rng_seed = seed;
      const auto arrivals = generate_arrivals(cfg);
      for (const bool proposed : policies) {
        const auto result = proposed ? run_proposed(cfg, arrivals) : run_baseline(cfg, arrivals);
        const auto metrics = compute_metrics(result.trajectory, cfg);
        const auto stem = fmt::format("{}_seed{}", policy_name(proposed), seed);
        {
          auto f = open_output(req.output_dir / (stem + "_events.csv"));
          write_events_csv(f, result.events);
        }
        {
          auto f = open_output(req.output_dir / (stem + "_metrics.json"));
          write_metrics_json(f, metrics);
        }
        if (req.emit_trajectories) {
          auto f = open_output(req.output_dir / (stem + "_trajectories.csv"));
          write_trajectory_csv(f, result.trajectory);
        }
        write_metrics_csv_row(summary, policy_name(proposed), seed, metrics);
        (proposed ? proposed_runs : baseline_runs).push_back(metrics);
        fmt::print(out, "{} seed {}: {} platoons, {} vehicles, avg travel time {:.3f} s, "
                        "avg stops {:.3f}, fuel proxy {:.3f}\n",
                   policy_name(proposed), seed, result.platoons.size(), metrics.vehicles,
                   metrics.avg_travel_time, metrics.avg_stops, metrics.fuel_proxy);
      }
    }
  } catch (const SimulationAbort& e) {
    fmt::print(err, "simulation aborted (seed {}): {}\n", cfg.rng_seed, e.what());
    return kExitAbort;
  } catch (const MetricsError& e) {
    fmt::print(err, "simulation aborted (seed {}): {}\n", cfg.rng_seed, e.what());
    return kExitAbort;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitInvalid;
  }

  if (req.policy == Policy::Both) {
    const auto report = compare_runs(average_runs(proposed_runs), average_runs(baseline_runs));
    auto f = open_output(req.output_dir / "comparison.csv");
    write_comparison_csv(f, report);
    fmt::print(out, "seed-averaged comparison over {} seeds:\n", req.seeds.size());
    write_comparison_csv(out, report);
  }
  return kExitOk;
}

namespace {

struct PlatoonFileOptions {
  std::string file;
  std::string scenario;
  std::optional<double> safe_gap;
  double now = 0.0;
  double last_leave = 0.0;
};

struct LoadedBatch {
  std::vector<Platoon> platoons;
  RoadGeometry geometry;
  double safe_gap = 1.0;
};

LoadedBatch load_batch(const PlatoonFileOptions& o) {
  ScenarioConfig cfg;
  if (!o.scenario.empty()) {
    try {
      cfg = load_scenario(o.scenario);
    } catch (const ConfigError& e) {
      throw InputError(fmt::format("{}: {}", o.scenario, e.what()));
    }
    if (auto r = validate_scenario(cfg); !r.ok())
      throw InputError(fmt::format("{}: {}", o.scenario, r.violations.front()));
  }
  LoadedBatch b;
  b.geometry = cfg.geometry;
  b.safe_gap = o.safe_gap.value_or(cfg.safe_time_gap);
  try {
    b.platoons = parse_platoon_csv(read_file(o.file), b.geometry);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", o.file, e.what()));
  }
  if (b.platoons.empty()) throw InputError(fmt::format("{}: no platoons", o.file));
  return b;
}

void add_batch_options(CLI::App& cmd, PlatoonFileOptions& o) {
  cmd.add_option("file", o.file, "Platoon list CSV")->required();
  cmd.add_option("--scenario", o.scenario, "Scenario file for geometry and safe gap");
  cmd.add_option("--safe-gap", o.safe_gap, "Safe time gap t_g in seconds");
  cmd.add_option("--now", o.now, "Current time in seconds");
  cmd.add_option("--last-leave", o.last_leave, "Leave time of the last committed platoon");
}

int cmd_schedule(const PlatoonFileOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const auto b = load_batch(o);
    const auto s = build_schedule(b.platoons, b.geometry, b.safe_gap, o.now, o.last_leave);
    write_schedule_csv(out, s);
    fmt::print(out, "# T_WC = {}\n", total_weighted_completion(s, o.now));
    return kExitOk;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (const ScheduleError& e) {
    fmt::print(err, "error: {}\n", e.what());
  }
  return kExitInvalid;
}

int cmd_oracle(const PlatoonFileOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const auto b = load_batch(o);
    if (b.platoons.size() > kMaxOraclePlatoons) {
      fmt::print(err, "error: the brute-force oracle handles at most {} platoons ({} given)\n",
                 kMaxOraclePlatoons, b.platoons.size());
      return kExitInvalid;
    }
    const auto s = build_schedule(b.platoons, b.geometry, b.safe_gap, o.now, o.last_leave);
    const double wspt = total_weighted_completion(s, o.now);
    const auto best =
        brute_force_best_sequence(b.platoons, b.geometry, b.safe_gap, o.now, o.last_leave);
    const bool match = std::abs(wspt - best.total_weighted_completion) <=
                       1e-9 * std::max(1.0, std::abs(best.total_weighted_completion));
    fmt::print(out, "wspt_sequence = {}\n", fmt::join(s.sequence(), " "));
    fmt::print(out, "wspt_twc = {}\n", wspt);
    fmt::print(out, "oracle_sequence = {}\n", fmt::join(best.sequence, " "));
    fmt::print(out, "oracle_twc = {}\n", best.total_weighted_completion);
    fmt::print(out, "match = {}\n", match ? "yes" : "no");
    return kExitOk;
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
  } catch (const ScheduleError& e) {
    fmt::print(err, "error: {}\n", e.what());
  }
  return kExitInvalid;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(path);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}: {}\n", path, e.what());
    return kExitInvalid;
  }
  const auto report = validate_scenario(cfg);
  if (report.ok()) {
    fmt::print(out, "{}: ok\n", path);
    return kExitOk;
  }
  fmt::print(err, "{}: {} violation(s)\n", path, report.violations.size());
  for (const auto& v : report.violations) fmt::print(err, "  - {}\n", v);
  return kExitInvalid;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Platoon scheduling and trajectory planning at a highway on-ramp"};
  app.require_subcommand(1);

  RunRequest req;
  std::string scenario;
  std::string policy = "both";
  std::string seeds = "1";
  std::string output_dir = "out";
  auto* run = app.add_subcommand("run", "Simulate one or both policies over seeds");
  run->add_option("--scenario", scenario, "Scenario file")->required();
  run->add_option("--policy", policy, "proposed, baseline or both")
      ->check(CLI::IsMember({"proposed", "baseline", "both"}));
  run->add_option("--seeds", seeds, "Seeds, e.g. 1..20 or 1,4,9");
  run->add_option("--output-dir", output_dir, "Directory for output files");
  run->add_flag("--emit-trajectories", req.emit_trajectories, "Write per-vehicle trajectory logs");

  PlatoonFileOptions sched_opts;
  auto* schedule = app.add_subcommand("schedule", "Print the merging schedule for a platoon list");
  add_batch_options(*schedule, sched_opts);

  PlatoonFileOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle", "Compare the schedule with exhaustive search");
  add_batch_options(*oracle, oracle_opts);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", validate_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*run) {
    req.scenario_path = scenario;
    req.policy = policy == "proposed" ? Policy::Proposed
                 : policy == "baseline" ? Policy::Baseline
                                        : Policy::Both;
    req.output_dir = output_dir;
    try {
      req.seeds = parse_seeds(seeds);
    } catch (const InputError& e) {
      fmt::print(err, "error: {}\n", e.what());
      return kExitInvalid;
    }
    return cmd_run(req, out, err);
  }
  if (*schedule) return cmd_schedule(sched_opts, out, err);
  if (*oracle) return cmd_oracle(oracle_opts, out, err);
  return cmd_validate(validate_path, out, err);
}

}  // namespace onramp::cli
