#include <gtest/gtest.h>

#include "onramp/scenario_io.hpp"

using namespace onramp;

TEST(ScenarioIo, EmptyTextGivesDefaults) {
  EXPECT_EQ(parse_scenario(""), ScenarioConfig{});
  EXPECT_EQ(parse_scenario("# only a comment\n\n"), ScenarioConfig{});
}

TEST(ScenarioIo, ParsesKeysRangesAndComments) {
  const auto cfg = parse_scenario(
      "control_zone_length = 200   # longer zone\n"
      "ramp_platoon_size_range = 2, 4\n"
      "rng_seed=42\n"
      "  u_min = -2.5\n");
  EXPECT_EQ(cfg.geometry.control_zone_length, 200.0);
  EXPECT_EQ(cfg.ramp_platoon_size_range, (SizeRange{2, 4}));
  EXPECT_EQ(cfg.rng_seed, 42u);
  EXPECT_EQ(cfg.geometry.u_min, -2.5);
}

TEST(ScenarioIo, ErrorsCarryLineNumbers) {
  try {
    parse_scenario("v_max = 25\n\nlane_count = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  try {
    parse_scenario("v_max = fast\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(ScenarioIo, RejectsDuplicatesAndMalformedLines) {
  EXPECT_THROW(parse_scenario("v_max = 25\nv_max = 20\n"), ConfigError);
  EXPECT_THROW(parse_scenario("v_max 25\n"), ConfigError);
  EXPECT_THROW(parse_scenario("v_max =\n"), ConfigError);
  EXPECT_THROW(parse_scenario("ramp_platoon_size_range = 3\n"), ConfigError);
  EXPECT_THROW(parse_scenario("rng_seed = 1.5\n"), ConfigError);
}

TEST(ScenarioIo, FormatRoundTrips) {
  ScenarioConfig cfg;
  cfg.geometry.control_zone_length = 187.25;
  cfg.safe_time_gap = 0.1 + 0.2;
  cfg.highway_platoon_size_range = {2, 7};
  cfg.rng_seed = 18446744073709551615ull;
  cfg.approach_length = 123.456;
  EXPECT_EQ(parse_scenario(format_scenario(cfg)), cfg);
}

TEST(ScenarioIo, PaperScenarioLoadsAndValidates) {
  const auto cfg = load_scenario(ONRAMP_SCENARIO_DIR "/paper_iv.cfg");
  EXPECT_EQ(cfg.geometry, paper_geometry());
  EXPECT_EQ(cfg.highway_volume, 1060.0);
  EXPECT_EQ(cfg.ramp_volume, 450.0);
  EXPECT_EQ(cfg.highway_platoon_size_range, (SizeRange{1, 5}));
  EXPECT_EQ(cfg.ramp_platoon_size_range, (SizeRange{1, 3}));
  EXPECT_EQ(cfg.sim_duration, 900.0);
  EXPECT_TRUE(validate_scenario(cfg).ok());
}

TEST(ScenarioIo, MissingFile) {
  EXPECT_THROW(load_scenario("/nonexistent/scenario.cfg"), ConfigError);
}
