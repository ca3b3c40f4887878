#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "onramp/cli.hpp"

using namespace onramp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "onramp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const char* name) { return std::string(ONRAMP_DATA_DIR "/") + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("onramp_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Cli, ParseSeeds) {
  EXPECT_EQ(cli::parse_seeds("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(cli::parse_seeds("1..3"), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(cli::parse_seeds("1..2,9"), (std::vector<std::uint64_t>{1, 2, 9}));
  EXPECT_EQ(cli::parse_seeds("1,3"), (std::vector<std::uint64_t>{1, 3}));
  EXPECT_THROW(cli::parse_seeds(""), cli::InputError);
  EXPECT_THROW(cli::parse_seeds("3..1"), cli::InputError);
  EXPECT_THROW(cli::parse_seeds("a"), cli::InputError);
}

TEST(Cli, PlatoonCsvErrorsNameTheLine) {
  const auto g = paper_geometry();
  const std::string header = "id,origin,weight,size,headway,arrival_time,initial_speed\n";
  EXPECT_EQ(cli::parse_platoon_csv(header + "# note\n1,ramp,1,2,1,0,22\n", g).size(), 1u);
  try {
    cli::parse_platoon_csv(header + "1,ramp,1,2,1,0,22\n2,lane,1,2,1,0,22\n", g);
    FAIL();
  } catch (const cli::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    cli::parse_platoon_csv(header + "1,ramp,1,2,1,0,40\n", g);
    FAIL();
  } catch (const cli::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(cli::parse_platoon_csv("id,size\n", g), cli::InputError);
}

TEST(Cli, ScheduleSinglePlatoon) {
  const auto r = invoke({"schedule", data("single_platoon.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("# T_WC = 16.4"), std::string::npos) << r.out;
}

TEST(Cli, OracleAgreesOnFivePlatoons) {
  const auto r = invoke({"oracle", data("oracle_5.csv")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream expected(slurp(data("oracle_5.expected")));
  std::string line;
  while (std::getline(expected, line)) {
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 3);
    EXPECT_NE(r.out.find("wspt_" + key + " = " + value), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("oracle_" + key + " = " + value), std::string::npos) << r.out;
  }
  EXPECT_NE(r.out.find("match = yes"), std::string::npos);
}

TEST(Cli, OracleReportsMismatch) {
  const auto r = invoke({"oracle", data("adversarial.csv"), "--safe-gap", "0"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("wspt_sequence = 1 2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("oracle_sequence = 2 1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("match = no"), std::string::npos);
}

TEST(Cli, RejectsBadInput) {
  EXPECT_EQ(invoke({"schedule", data("weight_zero.csv")}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"oracle", data("ten_platoons.csv")}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"schedule", data("missing.csv")}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"frobnicate"}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({}).code, cli::kExitInvalid);
  EXPECT_EQ(invoke({"--help"}).code, cli::kExitOk);
}

TEST(Cli, ValidateScenario) {
  const auto ok = invoke({"validate", "--scenario", ONRAMP_SCENARIO_DIR "/paper_iv.cfg"});
  EXPECT_EQ(ok.code, cli::kExitOk);
  EXPECT_NE(ok.out.find(": ok"), std::string::npos);

  const auto dir = scratch("validate");
  const auto cfg = dir / "short.cfg";
  std::ofstream(cfg) << "control_zone_length = 50\n";
  const auto bad = invoke({"validate", "--scenario", cfg.string()});
  EXPECT_EQ(bad.code, cli::kExitInvalid);
  EXPECT_NE(bad.err.find("control zone too short to reach v_max"), std::string::npos) << bad.err;
  EXPECT_EQ(invoke({"run", "--scenario", cfg.string(), "--output-dir", dir.string()}).code,
            cli::kExitInvalid);
}

TEST(Cli, RunWritesOutputsDeterministically) {
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  const std::string scenario = ONRAMP_SCENARIO_DIR "/paper_iv.cfg";
  const auto ra = invoke({"run", "--scenario", scenario, "--policy", "both", "--seeds", "1..2",
                          "--output-dir", a.string(), "--emit-trajectories"});
  const auto rb = invoke({"run", "--scenario", scenario, "--policy", "both", "--seeds", "1..2",
                          "--output-dir", b.string(), "--emit-trajectories"});
  ASSERT_EQ(ra.code, cli::kExitOk) << ra.err;
  ASSERT_EQ(rb.code, cli::kExitOk) << rb.err;
  EXPECT_EQ(ra.out, rb.out);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
  // 2 seeds x 2 policies x 3 files, plus metrics.csv and comparison.csv.
  EXPECT_EQ(files, 14);
  EXPECT_TRUE(fs::exists(a / "proposed_seed2_trajectories.csv"));
  EXPECT_EQ(slurp(a / "comparison.csv").rfind("metric,proposed,baseline,reduction_pct\n", 0), 0u);
}

TEST(Cli, AbortExitCode) {
  const auto dir = scratch("abort");
  const auto cfg = dir / "no_approach.cfg";
  std::ofstream(cfg) << "approach_length = 0\n";
  const auto r = invoke({"run", "--scenario", cfg.string(), "--policy", "proposed", "--seeds", "1",
                         "--output-dir", dir.string()});
  EXPECT_EQ(r.code, cli::kExitAbort);
  EXPECT_NE(r.err.find("aborted"), std::string::npos);
}
