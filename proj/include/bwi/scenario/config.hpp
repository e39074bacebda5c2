#pragma once

// Run configuration: one JSON document per run, schema_version 1.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bwi/ballast_discharge.hpp"
#include "bwi/cge/config.hpp"
#include "bwi/common/error.hpp"
#include "bwi/compliance_cost.hpp"
#include "bwi/movement_ingest.hpp"

namespace bwi {

enum class ConfigErrorKind { Unreadable, Invalid, UnsupportedSchema };
using ConfigError = KindedError<ConfigErrorKind>;

inline constexpr int kConfigSchemaVersion = 1;

struct CostRange {
  double low = 0.0;
  double high = 0.0;
};

/// Low/high ranges for the monetary inputs; the run uses their midpoints.
struct CostRanges {
  CostRange c_v_imo_pv{750'000, 1'250'000};
  CostRange o_v_imo{20'000, 30'000};
  CostRange t_imo{0.04, 0.06};
  CostRange c_barge_pv{8'000'000, 12'000'000};
  CostRange c_p_us_pv{4'000'000, 6'000'000};
  CostRange o_p_us{1'600'000, 2'400'000};
  CostRange t_us{0.16, 0.24};
  CostRange t_tug{4'000, 6'000};
  std::optional<double> p_stricter;  // default: stricter-region ports in the registry
  int lifetime_years = 30;
  double discount_rate = 0.06;
  double inflation_rate = 0.025;
};

struct DataPaths {
  std::filesystem::path vessels, ports, movements, daily_costs, sam, margins;
};

struct ScenarioConfig {
  std::string name = "run";
  int year = 2011;
  std::vector<Scenario> scenarios = {Scenario::Consistent, Scenario::StricterRegional};
  CountrySet stricter_region = {"USA"};
  CountrySet countries = default_country_set();
  DataPaths data;
  CostRanges costs;
  bool tug_scales_with_probability = true;
  DischargeModel discharge;
  cge::EconomyConfig economy;
  double alpha = 0.6;
  std::map<VesselType, double> alpha_by_type;
  double shock_threshold_pct = 10.0;
  long long traffic_min_voyages = 10;
  std::optional<std::uint64_t> seed;  // the world seed, when generated

  void validate() const {
    auto fail = [](const std::string& what) {
      throw ConfigError(ConfigErrorKind::Invalid, "config: " + what);
    };
    if (scenarios.empty()) fail("no scenarios selected");
    for (const Scenario s : scenarios) {
      if (s == Scenario::StricterRegional && stricter_region.empty()) {
        fail("StricterRegional needs a nonempty stricter_region");
      }
    }
    for (const auto& c : stricter_region) {
      if (!countries.count(c)) fail(fmt::format("stricter country {} is not a known country", c));
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must lie in (0, 1]");
    for (const auto& [t, a] : alpha_by_type) {
      if (!(a > 0.0 && a <= 1.0)) fail("alpha_by_type values must lie in (0, 1]");
    }
    if (shock_threshold_pct < 0.0) fail("shock_threshold_pct must be >= 0");
    if (traffic_min_voyages < 0) fail("traffic_min_voyages must be >= 0");
    discharge.validate();
    economy.validate();
    for (const auto& c : countries) economy.region_of(c);
  }
};

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline CostRange read_range(const nlohmann::json& j, const char* key, CostRange def) {
  if (!j.contains(key)) return def;
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), v.get<double>()};
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError(ConfigErrorKind::Invalid,
                      fmt::format("config: costs.{} must be [low, high] or a number", key));
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

inline std::vector<std::string> as_strings(const nlohmann::json& j) {
  return j.get<std::vector<std::string>>();
}

}  // namespace detail

/// Parses a config document; relative data paths resolve against `base_dir`.
inline ScenarioConfig parse_config(const std::string& text,
                                   const std::filesystem::path& base_dir = {}) {
  using nlohmann::json;
  ScenarioConfig cfg;
  try {
    const json j = json::parse(text);
    const int version = j.at("schema_version").get<int>();
    if (version != kConfigSchemaVersion) {
      throw ConfigError(ConfigErrorKind::UnsupportedSchema,
                        fmt::format("config: schema_version {} is not supported (expected {})",
                                    version, kConfigSchemaVersion));
    }
    detail::read_opt(j, "name", cfg.name);
    detail::read_opt(j, "year", cfg.year);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scenarios")) {
      cfg.scenarios.clear();
      for (const auto& s : detail::as_strings(j.at("scenarios"))) {
        const auto parsed = parse_scenario(s);
        if (!parsed) throw ConfigError(ConfigErrorKind::Invalid, "config: unknown scenario " + s);
        cfg.scenarios.push_back(*parsed);
      }
    }
    if (j.contains("stricter_region")) {
      const auto v = detail::as_strings(j.at("stricter_region"));
      cfg.stricter_region = CountrySet(v.begin(), v.end());
    }
    if (j.contains("countries")) {
      const auto v = detail::as_strings(j.at("countries"));
      cfg.countries = CountrySet(v.begin(), v.end());
    }

    const json& d = j.at("data");
    auto path = [&](const char* key) {
      std::filesystem::path p = d.at(key).get<std::string>();
      return p.is_relative() ? base_dir / p : p;
    };
    cfg.data = {path("vessels"), path("ports"),  path("movements"),
                path("daily_costs"), path("sam"), path("margins")};

    if (j.contains("costs")) {
      const json& c = j.at("costs");
      auto& r = cfg.costs;
      r.c_v_imo_pv = detail::read_range(c, "c_v_imo_pv", r.c_v_imo_pv);
      r.o_v_imo = detail::read_range(c, "o_v_imo", r.o_v_imo);
      r.t_imo = detail::read_range(c, "t_imo", r.t_imo);
      r.c_barge_pv = detail::read_range(c, "c_barge_pv", r.c_barge_pv);
      r.c_p_us_pv = detail::read_range(c, "c_p_us_pv", r.c_p_us_pv);
      r.o_p_us = detail::read_range(c, "o_p_us", r.o_p_us);
      r.t_us = detail::read_range(c, "t_us", r.t_us);
      r.t_tug = detail::read_range(c, "t_tug", r.t_tug);
      if (c.contains("p_stricter") && !c.at("p_stricter").is_null()) {
        r.p_stricter = c.at("p_stricter").get<double>();
      }
      detail::read_opt(c, "lifetime_years", r.lifetime_years);
      detail::read_opt(c, "discount_rate", r.discount_rate);
      detail::read_opt(c, "inflation_rate", r.inflation_rate);
      detail::read_opt(c, "tug_scales_with_probability", cfg.tug_scales_with_probability);
    }
    if (j.contains("discharge")) {
      const json& c = j.at("discharge");
      detail::read_opt(c, "coeff_a", cfg.discharge.coeff_a);
      detail::read_opt(c, "coeff_b", cfg.discharge.coeff_b);
      detail::read_opt(c, "fallback_volume", cfg.discharge.fallback_volume);
      detail::read_opt(c, "discharge_probability", cfg.discharge.discharge_probability);
    }

    const json& e = j.at("economy");
    for (const auto& r : e.at("regions")) {
      cge::RegionSpec region;
      region.id = r.at("id").get<std::string>();
      if (r.contains("members")) region.members = detail::as_strings(r.at("members"));
      detail::read_opt(r, "catch_all", region.catch_all);
      detail::read_opt(r, "gdp_weight", region.gdp_weight);
      cfg.economy.regions.push_back(std::move(region));
    }
    for (const auto& s : e.at("sectors")) {
      cge::SectorSpec sector;
      sector.id = s.at("id").get<std::string>();
      sector.group = s.at("group").get<std::string>();
      detail::read_opt(s, "armington_sigma", sector.armington_sigma);
      detail::read_opt(s, "output_weight", sector.output_weight);
      cfg.economy.sectors.push_back(std::move(sector));
    }
    detail::read_opt(e, "top_sigma", cfg.economy.top_sigma);
    detail::read_opt(e, "dual_container_weight", cfg.economy.dual_container_weight);
    detail::read_opt(e, "numeraire_region", cfg.economy.numeraire_region);
    detail::read_opt(e, "numeraire_price", cfg.economy.numeraire_price);
    detail::read_opt(e, "water_transport_gdp_share", cfg.economy.water_transport_gdp_share);
    if (e.contains("solver")) {
      const json& s = e.at("solver");
      detail::read_opt(s, "tolerance", cfg.economy.solver.tolerance);
      detail::read_opt(s, "max_iterations", cfg.economy.solver.max_iterations);
      detail::read_opt(s, "fd_step", cfg.economy.solver.fd_step);
    }

    if (j.contains("traffic")) {
      const json& t = j.at("traffic");
      detail::read_opt(t, "alpha", cfg.alpha);
      if (t.contains("alpha_by_type")) {
        for (const auto& [k, v] : t.at("alpha_by_type").items()) {
          const auto type = parse_vessel_type(k);
          if (!type) throw ConfigError(ConfigErrorKind::Invalid, "config: unknown vessel type " + k);
          cfg.alpha_by_type[*type] = v.get<double>();
        }
      }
    }
    if (j.contains("reports")) {
      detail::read_opt(j.at("reports"), "shock_threshold_pct", cfg.shock_threshold_pct);
      detail::read_opt(j.at("reports"), "traffic_min_voyages", cfg.traffic_min_voyages);
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(ConfigErrorKind::Invalid, fmt::format("config: {}", ex.what()));
  }
  cfg.validate();
  return cfg;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    throw ConfigError(ConfigErrorKind::Unreadable, fmt::format("cannot read {}", p.string()));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig load_config(const std::filesystem::path& file) {
  return parse_config(read_file(file), file.parent_path());
}

/// Inverse of parse_config for generated worlds; data paths are written
/// relative to the config file's directory.
inline std::string config_to_json(const ScenarioConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["name"] = cfg.name;
  j["year"] = cfg.year;
  if (cfg.seed) j["seed"] = *cfg.seed;
  std::vector<std::string> scen;
  for (const Scenario s : cfg.scenarios) scen.emplace_back(to_string(s));
  j["scenarios"] = scen;
  j["stricter_region"] = std::vector<std::string>(cfg.stricter_region.begin(),
                                                  cfg.stricter_region.end());
  j["countries"] = std::vector<std::string>(cfg.countries.begin(), cfg.countries.end());
  j["data"] = {{"vessels", cfg.data.vessels.generic_string()},
               {"ports", cfg.data.ports.generic_string()},
               {"movements", cfg.data.movements.generic_string()},
               {"daily_costs", cfg.data.daily_costs.generic_string()},
               {"sam", cfg.data.sam.generic_string()},
               {"margins", cfg.data.margins.generic_string()}};
  const auto& r = cfg.costs;
  auto range = [](const CostRange& c) { return std::vector<double>{c.low, c.high}; };
  ordered_json costs;
  costs["c_v_imo_pv"] = range(r.c_v_imo_pv);
  costs["o_v_imo"] = range(r.o_v_imo);
  costs["t_imo"] = range(r.t_imo);
  costs["c_barge_pv"] = range(r.c_barge_pv);
  costs["c_p_us_pv"] = range(r.c_p_us_pv);
  costs["o_p_us"] = range(r.o_p_us);
  costs["t_us"] = range(r.t_us);
  costs["t_tug"] = range(r.t_tug);
  costs["p_stricter"] = r.p_stricter ? ordered_json(*r.p_stricter) : ordered_json(nullptr);
  costs["lifetime_years"] = r.lifetime_years;
  costs["discount_rate"] = r.discount_rate;
  costs["inflation_rate"] = r.inflation_rate;
  costs["tug_scales_with_probability"] = cfg.tug_scales_with_probability;
  j["costs"] = costs;
  j["discharge"] = {{"coeff_a", cfg.discharge.coeff_a},
                    {"coeff_b", cfg.discharge.coeff_b},
                    {"fallback_volume", cfg.discharge.fallback_volume},
                    {"discharge_probability", cfg.discharge.discharge_probability}};
  ordered_json econ;
  for (const auto& reg : cfg.economy.regions) {
    ordered_json o;
    o["id"] = reg.id;
    if (reg.catch_all) o["catch_all"] = true;
    if (!reg.members.empty()) o["members"] = reg.members;
    o["gdp_weight"] = reg.gdp_weight;
    econ["regions"].push_back(o);
  }
  for (const auto& s : cfg.economy.sectors) {
    econ["sectors"].push_back(ordered_json{{"id", s.id},
                                           {"group", s.group},
                                           {"armington_sigma", s.armington_sigma},
                                           {"output_weight", s.output_weight}});
  }
  econ["top_sigma"] = cfg.economy.top_sigma;
  econ["dual_container_weight"] = cfg.economy.dual_container_weight;
  if (!cfg.economy.numeraire_region.empty()) {
    econ["numeraire_region"] = cfg.economy.numeraire_region;
  }
  econ["numeraire_price"] = cfg.economy.numeraire_price;
  econ["water_transport_gdp_share"] = cfg.economy.water_transport_gdp_share;
  econ["solver"] = {{"tolerance", cfg.economy.solver.tolerance},
                    {"max_iterations", cfg.economy.solver.max_iterations},
                    {"fd_step", cfg.economy.solver.fd_step}};
  j["economy"] = econ;
  ordered_json traffic;
  traffic["alpha"] = cfg.alpha;
  for (const auto& [t, a] : cfg.alpha_by_type) traffic["alpha_by_type"][std::string(to_string(t))] = a;
  j["traffic"] = traffic;
  j["reports"] = {{"shock_threshold_pct", cfg.shock_threshold_pct},
                  {"traffic_min_voyages", cfg.traffic_min_voyages}};
  return j.dump(2) + "\n";
}

}  // namespace bwi
