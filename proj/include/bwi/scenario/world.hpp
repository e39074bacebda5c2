#pragma once

// Seeded synthetic worlds: fleet, ports, one year of movements, daily cost
// schedules, and a benchmark economy, plus a config that runs them.
//
// paper_mirror targets: mean annual international voyages per vessel of
// 18 / 9 / 13 (container / bulk / tanker) and fleet discharge totals in the
// proportion 108 : 389 : 280.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "bwi/baseline_cost.hpp"
#include "bwi/cge/sam.hpp"
#include "bwi/common/rng.hpp"
#include "bwi/movement_ingest.hpp"
#include "bwi/scenario/config.hpp"

namespace bwi {

enum class WorldScale { Tiny, Desk, PaperMirror };

inline std::optional<WorldScale> parse_scale(std::string_view s) {
  if (s == "tiny") return WorldScale::Tiny;
  if (s == "desk") return WorldScale::Desk;
  if (s == "paper_mirror") return WorldScale::PaperMirror;
  return std::nullopt;
}

inline constexpr std::string_view to_string(WorldScale s) {
  switch (s) {
    case WorldScale::Tiny: return "tiny";
    case WorldScale::Desk: return "desk";
    case WorldScale::PaperMirror: return "paper_mirror";
  }
  return "?";
}

struct World {
  ScenarioConfig config;  // data paths are file names relative to the bundle
  VesselRegistry vessels;
  PortRegistry ports;
  std::vector<VoyageRecord> movements;  // includes domestic moves
  DailyCostTable daily_costs;
  cge::Economy economy;
};

namespace world_detail {

struct CountrySite {
  std::string_view iso;
  double lat, lon;
  double trade_weight;  // destination attractiveness
};

// One representative port location per country.
inline constexpr std::array<CountrySite, 21> kSites = {{
    {"AUS", -33.9, 151.2, 2.0}, {"CHN", 31.2, 121.5, 10.0}, {"JPN", 35.4, 139.6, 5.0},
    {"KOR", 35.1, 129.0, 4.0},  {"SGP", 1.3, 103.8, 4.0},   {"MYS", 3.0, 101.4, 2.5},
    {"TWN", 22.6, 120.3, 2.5},  {"USA", 33.7, -118.3, 8.0}, {"CAN", 49.3, -123.1, 2.5},
    {"MEX", 19.2, -96.1, 2.0},  {"COL", 10.4, -75.5, 1.0},  {"PAN", 9.0, -79.5, 1.5},
    {"VEN", 10.5, -67.0, 1.0},  {"BEL", 51.2, 4.4, 2.5},    {"DEU", 53.5, 10.0, 4.0},
    {"ESP", 39.5, -0.4, 2.0},   {"FRA", 49.5, 0.1, 2.5},    {"GBR", 51.5, 0.0, 3.0},
    {"NLD", 51.9, 4.5, 4.0},    {"ZAF", -33.9, 18.4, 1.5},  {"ROW", 25.0, 55.0, 12.0},
}};

inline const CountrySite& site(std::string_view iso) {
  for (const auto& s : kSites) {
    if (s.iso == iso) return s;
  }
  return kSites.back();
}

/// Sea distance in km: great-circle distance with a routing detour factor.
inline double sea_km(const CountrySite& a, const CountrySite& b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 1.3 * 2.0 * 6371.0 * std::asin(std::sqrt(h));
}

struct TypeProfile {
  VesselType type;
  int fleet;              // vessels at this scale
  double median_dwt;      // before discharge rescaling
  double voyages_mean;    // international voyages per year
  double voyages_sd;
  int voyages_min, voyages_max;
  double speed_km_day;
  int area_min, area_max;  // countries in the vessel's trading area
  bool liner;              // cycles its area in order
};

struct ScaleProfile {
  std::vector<std::string> countries;
  std::map<std::string, int> ports_per_country;
  std::vector<TypeProfile> types;
  double domestic_share;
  double missing_dwt_share;
};

inline ScaleProfile profile(WorldScale scale) {
  ScaleProfile p;
  auto types = [](int container, int bulk, int tanker, double spread) {
    return std::vector<TypeProfile>{
        {VesselType::Container, container, 22000, 18, 3 * spread, 10, 28, 890, 3, 5, true},
        {VesselType::Bulk, bulk, 60000, 9, 2 * spread, 5, 14, 560, 4, 8, false},
        {VesselType::Tanker, tanker, 45000, 13, 2.5 * spread, 7, 20, 620, 4, 8, false},
    };
  };
  switch (scale) {
    case WorldScale::Tiny:
      p.countries = {"USA", "CAN", "CHN"};
      p.ports_per_country = {{"USA", 2}, {"CAN", 1}, {"CHN", 1}};
      p.types = types(2, 2, 2, 0.0);
      for (auto& t : p.types) {
        t.voyages_mean = std::min(t.voyages_mean, 6.0);
        t.voyages_min = 3;
        t.area_min = t.area_max = 3;
      }
      p.domestic_share = 0.0;
      p.missing_dwt_share = 0.0;
      return p;
    case WorldScale::Desk:
      for (const auto& s : kSites) p.countries.emplace_back(s.iso);
      for (const auto& c : p.countries) p.ports_per_country[c] = 2;
      p.ports_per_country["USA"] = 6;
      p.ports_per_country["CHN"] = 4;
      p.ports_per_country["ROW"] = 4;
      p.types = types(40, 60, 40, 1.0);
      p.domestic_share = 0.04;
      p.missing_dwt_share = 0.02;
      return p;
    case WorldScale::PaperMirror:
      for (const auto& s : kSites) p.countries.emplace_back(s.iso);
      for (const auto& c : p.countries) p.ports_per_country[c] = 3;
      p.ports_per_country["USA"] = 8;
      p.ports_per_country["CHN"] = 8;
      p.ports_per_country["JPN"] = 5;
      p.ports_per_country["ROW"] = 6;
      p.types = types(300, 500, 350, 1.0);
      p.domestic_share = 0.04;
      p.missing_dwt_share = 0.02;
      return p;
  }
  return p;
}

inline cge::EconomyConfig desk_economy() {
  cge::EconomyConfig e;
  e.regions = {
      {"USA", {"USA"}, false, 3.0}, {"CAN", {"CAN"}, false, 0.8}, {"MEX", {"MEX"}, false, 0.6},
      {"CHN", {"CHN"}, false, 2.5}, {"AUS", {"AUS"}, false, 0.6}, {"ROW", {}, true, 6.0},
  };
  e.sectors = {
      {"grains", "wheat_grains", 4.0, 0.6},
      {"coal", "coal", 4.0, 0.4},
      {"crude_oil", "crude_oil", 4.0, 0.8},
      {"petroleum", "petroleum_products", 4.0, 0.8},
      {"metal_chem", "metal_chemicals", 4.0, 1.5},
      {"machinery", "machine_equipment", 4.0, 2.0},
      {"services", "other_services", 4.0, 6.0},
      {"shipping", "water_transport", 4.0, 1.0},
  };
  for (auto& s : e.sectors) s.armington_sigma = 8.0;
  e.top_sigma = 4.0;
  e.numeraire_region = "USA";
  return e;
}

inline cge::EconomyConfig tiny_economy() {
  cge::EconomyConfig e;
  e.regions = {{"USA", {"USA"}, false, 1.0}, {"ROW", {}, true, 1.5}};
  e.sectors = {
      {"grains", "wheat_grains", 4.0, 1.0},
      {"crude_oil", "crude_oil", 4.0, 1.0},
      {"machinery", "machine_equipment", 4.0, 1.5},
      {"services", "other_services", 4.0, 4.0},
      {"shipping", "water_transport", 4.0, 1.0},
  };
  e.numeraire_region = "USA";
  return e;
}

/// Trade-weighted mean sea distance between model regions, divided by the
/// mean over all pairs; margin rates scale with it.
inline std::vector<double> region_distance_factors(const cge::EconomyConfig& e,
                                                   const std::vector<std::string>& countries) {
  const std::size_t nr = e.regions.size();
  std::vector<std::vector<std::string>> members(nr);
  for (const auto& c : countries) members[e.region_index(e.region_of(c))].push_back(c);
  std::vector<double> f(nr * nr, 0.0);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < nr; ++a) {
    for (std::size_t b = 0; b < nr; ++b) {
      if (a == b) continue;
      double num = 0.0, den = 0.0;
      for (const auto& x : members[a]) {
        for (const auto& y : members[b]) {
          const double w = site(x).trade_weight * site(y).trade_weight;
          num += w * sea_km(site(x), site(y));
          den += w;
        }
      }
      f[a * nr + b] = den > 0.0 ? num / den : 0.0;
      sum += f[a * nr + b];
      ++pairs;
    }
  }
  const double mean = sum / static_cast<double>(pairs);
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = f[k] > 0.0 ? std::clamp(f[k] / mean, 0.3, 2.5) : 1.0;
  }
  return f;
}

/// Closed walk using every directed edge of the complete graph on n nodes
/// once (Hierholzer), starting and ending at node 0.
inline std::vector<std::size_t> euler_circuit(std::size_t n) {
  if (n < 2) return {};
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = n; b-- > 0;) {
      if (a != b) out[a].push_back(b);
    }
  }
  std::vector<std::size_t> stack = {0}, walk;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    if (out[v].empty()) {
      walk.push_back(v);
      stack.pop_back();
    } else {
      stack.push_back(out[v].back());
      out[v].pop_back();
    }
  }
  std::reverse(walk.begin(), walk.end());
  return walk;
}

/// Route margin factors from the movements: mean baseline shipping cost per
/// tonne of DWT on each (origin region, dest region, vessel type), relative
/// to that type's mean over region pairs. Pairs without traffic of a type
/// fall back to relative sea distance.
inline cge::MarginFactorFn margin_factors(const cge::EconomyConfig& e,
                                          const std::vector<std::string>& countries,
                                          const std::vector<VoyageRecord>& movements,
                                          const VesselRegistry& vessels, const PortRegistry& ports,
                                          const DailyCostTable& table) {
  const std::size_t nr = e.regions.size();
  auto cell = [nr](std::size_t s, std::size_t r, VesselType t) {
    return (s * nr + r) * kAllVesselTypes.size() + static_cast<std::size_t>(t);
  };
  std::vector<double> sum(nr * nr * kAllVesselTypes.size(), 0.0), count(sum.size(), 0.0);
  for (const auto& v : movements) {
    const auto& vessel = vessels.at(v.vessel_id);
    if (!vessel.dwt) continue;
    const std::size_t s = e.region_index(e.region_of(ports.at(v.origin_port).country));
    const std::size_t r = e.region_index(e.region_of(ports.at(v.dest_port).country));
    if (s == r) continue;
    const double days = days_between(v.depart_time, v.arrive_time);
    const std::size_t k = cell(s, r, vessel.vessel_type);
    sum[k] += table.lookup(vessel.vessel_type, vessel.dwt).total() * days / *vessel.dwt;
    count[k] += 1.0;
  }
  std::vector<double> factor(sum.size(), 0.0);
  for (const VesselType t : kAllVesselTypes) {
    double total = 0.0, cells = 0.0;
    for (std::size_t s = 0; s < nr; ++s) {
      for (std::size_t r = 0; r < nr; ++r) {
        const std::size_t k = cell(s, r, t);
        if (count[k] > 0.0) {
          factor[k] = sum[k] / count[k];
          total += factor[k];
          cells += 1.0;
        }
      }
    }
    for (std::size_t s = 0; s < nr; ++s) {
      for (std::size_t r = 0; r < nr; ++r) {
        const std::size_t k = cell(s, r, t);
        if (count[k] > 0.0) factor[k] = std::clamp(factor[k] * cells / total, 0.2, 4.0);
      }
    }
  }
  const std::vector<double> distance = region_distance_factors(e, countries);
  return [e, nr, factor, distance, cell](std::size_t s, std::size_t r, std::size_t i) {
    auto of = [&](VesselType t) {
      const double f = factor[cell(s, r, t)];
      return f > 0.0 ? f : distance[s * nr + r];
    };
    const VesselAssignment a = e.assignment(i);
    if (a.carriage == Carriage::ContainerBulk) {
      return e.dual_container_weight * of(VesselType::Container) +
             (1.0 - e.dual_container_weight) * of(VesselType::Bulk);
    }
    return a.carriage == Carriage::Single ? of(a.type) : distance[s * nr + r];
  };
}

inline std::size_t weighted_pick(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (const double x : w) total += x;
  double u = rng.uniform() * total;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (u < w[k]) return k;
    u -= w[k];
  }
  return w.size() - 1;
}

}  // namespace world_detail

/// Builds a world. Identical (seed, scale) give identical worlds.
inline World generate_world(std::uint64_t seed, WorldScale scale) {
  using namespace world_detail;
  using namespace std::chrono;
  const ScaleProfile prof = profile(scale);
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(scale) + 1);
  World w;
  auto& cfg = w.config;
  cfg.name = fmt::format("{}-{}", to_string(scale), seed);
  cfg.year = 2011;
  cfg.seed = seed;
  cfg.data = {"vessels.csv", "ports.csv", "movements.csv", "daily_costs.csv", "sam.csv",
              "margins.csv"};
  cfg.economy = scale == WorldScale::Tiny ? tiny_economy() : desk_economy();
  cfg.discharge.coeff_a = 0.35;
  cfg.discharge.coeff_b = 1.0;
  cfg.discharge.fallback_volume = 12000.0;
  cfg.discharge.discharge_probability = 0.5;
  if (scale == WorldScale::Tiny) cfg.shock_threshold_pct = 10.0;
  if (scale != WorldScale::PaperMirror) cfg.traffic_min_voyages = 1;

  // Ports.
  std::vector<std::vector<std::string>> ports_of(prof.countries.size());
  for (std::size_t c = 0; c < prof.countries.size(); ++c) {
    const auto& iso = prof.countries[c];
    for (int k = 1; k <= prof.ports_per_country.at(iso); ++k) {
      const std::string id = fmt::format("{}{:02d}", iso, k);
      w.ports.insert(PortRecord{id, iso}, id);
      ports_of[c].push_back(id);
    }
  }
  std::vector<double> country_weight;
  for (const auto& iso : prof.countries) country_weight.push_back(site(iso).trade_weight);

  // Fleet.
  struct Plan {
    std::size_t vessel;
    int voyages;
    std::vector<std::size_t> area;
    double speed;
    bool liner;
    std::vector<std::size_t> route;  // fixed country sequence, when set
  };
  // Outside the tiny scale, a few vessels per type sail a circuit through
  // every directed pair of model regions, so each region pair has traffic of
  // every main type.
  std::vector<std::size_t> circuit;
  if (scale != WorldScale::Tiny) {
    std::vector<std::size_t> reps;
    for (const auto& reg : cfg.economy.regions) {
      std::size_t best = prof.countries.size();
      for (std::size_t c = 0; c < prof.countries.size(); ++c) {
        if (cfg.economy.region_of(prof.countries[c]) != reg.id) continue;
        if (best == prof.countries.size() ||
            site(prof.countries[c]).trade_weight > site(prof.countries[best]).trade_weight) {
          best = c;
        }
      }
      if (best < prof.countries.size()) reps.push_back(best);
    }
    for (const std::size_t k : euler_circuit(reps.size())) circuit.push_back(reps[k]);
  }
  std::vector<VesselRecord> fleet;
  std::vector<Plan> plans;
  for (const auto& tp : prof.types) {
    const std::size_t legs = circuit.empty() ? 0 : circuit.size() - 1;
    const std::size_t network = legs == 0 ? 0
        : static_cast<std::size_t>(std::ceil(static_cast<double>(legs) / tp.voyages_mean));
    for (int k = 0; k < tp.fleet; ++k) {
      VesselRecord v;
      v.vessel_id = fmt::format("V{:05d}", fleet.size() + 1);
      v.vessel_type = tp.type;
      const double dwt = std::round(rng.lognormal(tp.median_dwt, 0.45));
      if (rng.uniform() >= prof.missing_dwt_share) v.dwt = std::max(1000.0, dwt);
      v.build_year = static_cast<int>(rng.integer(1985, 2010));
      int n = static_cast<int>(std::lround(tp.voyages_mean + tp.voyages_sd * rng.normal()));
      n = std::clamp(n, tp.voyages_min, tp.voyages_max);
      const auto area_size = static_cast<std::size_t>(
          std::min<std::int64_t>(rng.integer(tp.area_min, tp.area_max),
                                 static_cast<std::int64_t>(prof.countries.size())));
      std::vector<std::size_t> area;
      std::vector<double> wts = country_weight;
      while (area.size() < area_size) {
        const std::size_t c = weighted_pick(rng, wts);
        area.push_back(c);
        wts[c] = 0.0;
      }
      Plan plan{fleet.size(), n, area, tp.speed_km_day, tp.liner, {}};
      if (static_cast<std::size_t>(k) < network) {
        const std::size_t from = legs * static_cast<std::size_t>(k) / network;
        const std::size_t to = legs * (static_cast<std::size_t>(k) + 1) / network;
        plan.route.assign(circuit.begin() + static_cast<long>(from),
                          circuit.begin() + static_cast<long>(to) + 1);
        plan.voyages = static_cast<int>(to - from);
      }
      plans.push_back(std::move(plan));
      fleet.push_back(std::move(v));
    }
  }

  // Rescale each type's DWT so fleet discharge totals follow the target
  // proportions; missing-DWT vessels keep the fallback volume, so iterate.
  if (scale != WorldScale::Tiny) {
    const std::map<VesselType, double> target = {
        {VesselType::Container, 108.0}, {VesselType::Bulk, 389.0}, {VesselType::Tanker, 280.0}};
    for (int round = 0; round < 30; ++round) {
      std::map<VesselType, double> total;
      double all = 0.0;
      for (const auto& p : plans) {
        const double vol = discharge_volume(fleet[p.vessel], cfg.discharge) * p.voyages;
        total[fleet[p.vessel].vessel_type] += vol;
        all += vol;
      }
      for (auto& v : fleet) {
        if (!v.dwt) continue;
        const double want = target.at(v.vessel_type) / 777.0 * all;
        const double f = std::pow(want / total[v.vessel_type], 1.0 / cfg.discharge.coeff_b);
        v.dwt = *v.dwt * f;
      }
    }
    for (auto& v : fleet) {
      if (v.dwt) v.dwt = std::max(1000.0, std::round(*v.dwt));
    }
  }
  for (auto& v : fleet) {
    const std::string id = v.vessel_id;
    w.vessels.insert(std::move(v), id);
  }

  // Movements: each vessel's international calls are spread evenly over the
  // year; domestic repositioning legs are extra and are dropped at ingest.
  const sys_days year_start{std::chrono::year{cfg.year} / 1 / 1};
  std::size_t voyage_no = 0;
  for (const auto& p : plans) {
    const VesselRecord& vessel = *w.vessels.find(fmt::format("V{:05d}", p.vessel + 1));
    const bool fixed = !p.route.empty();
    std::size_t at_country =
        fixed ? p.route.front()
              : p.area[static_cast<std::size_t>(rng.integer(0, p.area.size() - 1))];
    std::string at_port = ports_of[at_country][static_cast<std::size_t>(
        rng.integer(0, ports_of[at_country].size() - 1))];
    std::size_t liner_pos = 0;
    for (std::size_t k = 0; k < p.area.size(); ++k) {
      if (p.area[k] == at_country) liner_pos = k;
    }
    std::vector<std::pair<std::size_t, bool>> legs;  // (dest country, domestic)
    std::size_t cur = at_country;
    for (int k = 0; k < p.voyages; ++k) {
      if (prof.domestic_share > 0.0 && ports_of[cur].size() > 1 &&
          rng.uniform() < prof.domestic_share) {
        legs.push_back({cur, true});
      }
      std::size_t next = cur;
      if (fixed) {
        next = p.route[static_cast<std::size_t>(k) + 1];
      } else if (p.liner) {
        liner_pos = (liner_pos + 1) % p.area.size();
        next = p.area[liner_pos];
      } else {
        std::vector<double> wts;
        for (const std::size_t c : p.area) wts.push_back(c == cur ? 0.0 : country_weight[c]);
        next = p.area[weighted_pick(rng, wts)];
      }
      legs.push_back({next, false});
      cur = next;
    }
    const double slot = 365.0 / static_cast<double>(legs.size());
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const auto [dest_country, domestic] = legs[k];
      const auto& choices = ports_of[dest_country];
      std::string dest_port;
      do {
        dest_port = choices[static_cast<std::size_t>(rng.integer(0, choices.size() - 1))];
      } while (domestic && dest_port == at_port);
      const auto& from = site(w.ports.at(at_port).country);
      const auto& to = site(w.ports.at(dest_port).country);
      const double sea_days = domestic ? rng.uniform(0.5, 2.0) : sea_km(from, to) / p.speed;
      const double days = std::min(sea_days + rng.uniform(1.0, 3.0), 0.95 * slot);
      const double start_day = k * slot + rng.uniform(0.0, 0.04 * slot);
      const auto depart = year_start + minutes(static_cast<long long>(start_day * 1440.0));
      const auto arrive = depart + minutes(std::max(60LL, static_cast<long long>(days * 1440.0)));
      VoyageRecord v;
      v.voyage_id = fmt::format("M{:07d}", ++voyage_no);
      v.vessel_id = vessel.vessel_id;
      v.origin_port = at_port;
      v.dest_port = dest_port;
      v.origin_country = w.ports.at(at_port).country;
      v.dest_country = w.ports.at(dest_port).country;
      v.depart_time = Timestamp{duration_cast<microseconds>(depart.time_since_epoch())};
      v.arrive_time = Timestamp{duration_cast<microseconds>(arrive.time_since_epoch())};
      v.duration_days = days_between(v.depart_time, v.arrive_time);
      w.movements.push_back(std::move(v));
      at_port = dest_port;
    }
  }

  w.daily_costs = synthetic_daily_cost_table();
  cfg.countries = CountrySet(prof.countries.begin(), prof.countries.end());
  cfg.countries.insert("ROW");
  w.economy = cge::build_synthetic_sam(
      cfg.economy, seed ^ 0x5A17ULL,
      margin_factors(cfg.economy, prof.countries, w.movements, w.vessels, w.ports, w.daily_costs));
  return w;
}

/// Writes the bundle files and config.json into `dir` (created if needed).
inline void write_world(const World& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::filesystem::path& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError(ConfigErrorKind::Unreadable, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open(w.config.data.vessels);
    write_vessels(out, w.vessels);
  }
  {
    auto out = open(w.config.data.ports);
    write_ports(out, w.ports);
  }
  {
    auto out = open(w.config.data.movements);
    write_movements(out, w.movements);
  }
  {
    auto out = open(w.config.data.daily_costs);
    write_daily_costs(out, w.daily_costs);
  }
  {
    auto out = open(w.config.data.sam);
    cge::write_sam(out, w.economy.sam);
  }
  {
    auto out = open(w.config.data.margins);
    cge::write_margins(out, w.economy.margins);
  }
  auto out = open("config.json");
  out << config_to_json(w.config);
}

}  // namespace bwi
