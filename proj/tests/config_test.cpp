#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bwi/scenario/config.hpp"
#include "bwi/scenario/world.hpp"

namespace bwi {
namespace {

std::string minimal() {
  return R"({
    "schema_version": 1,
    "data": {"vessels": "v.csv", "ports": "p.csv", "movements": "m.csv",
             "daily_costs": "d.csv", "sam": "s.csv", "margins": "g.csv"},
    "economy": {
      "regions": [{"id": "USA", "members": ["USA"]}, {"id": "ROW", "catch_all": true}],
      "sectors": [{"id": "oil", "group": "crude_oil"},
                  {"id": "ship", "group": "water_transport"}]
    }
  })";
}

ConfigErrorKind config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no ConfigError thrown";
  return ConfigErrorKind::Unreadable;
}

std::string patched(const nlohmann::json& patch) {
  auto j = nlohmann::json::parse(minimal());
  j.merge_patch(patch);
  return j.dump();
}

TEST(Config, DefaultsAndRelativePaths) {
  const auto cfg = parse_config(minimal(), "/data/world");
  EXPECT_EQ(cfg.year, 2011);
  EXPECT_EQ(cfg.scenarios.size(), 2u);
  EXPECT_EQ(cfg.stricter_region, CountrySet{"USA"});
  EXPECT_EQ(cfg.data.sam, std::filesystem::path("/data/world/s.csv"));
  EXPECT_DOUBLE_EQ(cfg.costs.c_v_imo_pv.low, 750'000);
  EXPECT_EQ(cfg.economy.region_of("DEU"), "ROW");
}

TEST(Config, Errors) {
  EXPECT_EQ(config_error(patched({{"schema_version", 2}})), ConfigErrorKind::UnsupportedSchema);
  EXPECT_EQ(config_error("{"), ConfigErrorKind::Invalid);
  EXPECT_EQ(config_error(patched({{"scenarios", {"Lenient"}}})), ConfigErrorKind::Invalid);
  EXPECT_EQ(config_error(patched({{"stricter_region", {"XXX"}}})), ConfigErrorKind::Invalid);
  EXPECT_EQ(config_error(patched({{"traffic", {{"alpha", 1.5}}}})), ConfigErrorKind::Invalid);
  EXPECT_EQ(config_error(patched({{"costs", {{"t_imo", {1, 2, 3}}}}})), ConfigErrorKind::Invalid);
  EXPECT_THROW(
      parse_config(patched({{"economy", {{"sectors", {{{"id", "oil"}, {"group", "crude_oil"}}}}}}})),
      cge::CgeError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, StricterScenarioNeedsRegion) {
  EXPECT_EQ(config_error(patched({{"stricter_region", nlohmann::json::array()}})),
            ConfigErrorKind::Invalid);
  EXPECT_NO_THROW(parse_config(patched(
      {{"stricter_region", nlohmann::json::array()}, {"scenarios", {"Consistent"}}})));
}

TEST(Config, SerializationRoundTrips) {
  auto cfg = generate_world(1, WorldScale::Tiny).config;
  cfg.alpha_by_type[VesselType::Tanker] = 0.7;
  cfg.costs.p_stricter = 3.0;
  cfg.seed = 99;
  const std::string text = config_to_json(cfg);
  const auto back = parse_config(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(back.alpha_by_type.at(VesselType::Tanker), 0.7);
  EXPECT_EQ(*back.seed, 99u);
}

}  // namespace
}  // namespace bwi
