#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bwi/commodity_map.hpp"
#include "bwi/common/error.hpp"

namespace bwi::cge {

enum class CgeErrorKind {
  InvalidConfig,
  MalformedSam,
  BalanceFailure,
  InconsistentSam,
  ZeroFlowNest,
  UnmappedSector,
  NoConvergence,
  NonPositivePrice,
};
using CgeError = KindedError<CgeErrorKind>;

/// A model region: an explicit list of member countries, or the catch-all
/// that absorbs every country not listed elsewhere.
struct RegionSpec {
  std::string id;
  std::vector<std::string> members;
  bool catch_all = false;
  double gdp_weight = 1.0;  // relative size, synthetic SAM only
};

struct SectorSpec {
  std::string id;
  std::string group;  // commodity group id, e.g. "coal"
  double armington_sigma = 4.0;
  double output_weight = 1.0;  // synthetic SAM only
};

struct SolverOptions {
  double tolerance = 1e-10;  // max-norm of the scaled residual
  int max_iterations = 200;
  double fd_step = 1e-7;  // in log space
};

struct EconomyConfig {
  std::vector<RegionSpec> regions;
  std::vector<SectorSpec> sectors;
  double top_sigma = 2.0;                   // domestic vs. import composite
  double dual_container_weight = 0.5;       // container share for con/bulk sectors
  std::string numeraire_region;             // empty: the first region
  double numeraire_price = 1.0;             // wage of the numeraire region
  double water_transport_gdp_share = 0.005;  // synthetic SAM target
  SolverOptions solver;

  void validate() const {
    auto fail = [](const std::string& what) {
      throw CgeError(CgeErrorKind::InvalidConfig, "economy config: " + what);
    };
    if (regions.size() < 2) fail("at least two regions are required");
    if (sectors.size() < 2) fail("at least two sectors are required");
    std::set<std::string> ids, countries;
    int catch_all = 0;
    for (const auto& r : regions) {
      if (r.id.empty() || !ids.insert(r.id).second) fail(fmt::format("bad region id '{}'", r.id));
      if (!(r.gdp_weight > 0.0)) fail(fmt::format("region {} needs gdp_weight > 0", r.id));
      catch_all += r.catch_all;
      for (const auto& c : r.members) {
        if (!countries.insert(c).second) fail(fmt::format("country {} is in two regions", c));
      }
    }
    if (catch_all > 1) fail("at most one catch-all region");
    ids.clear();
    int wt = 0;
    for (const auto& s : sectors) {
      if (s.id.empty() || !ids.insert(s.id).second) fail(fmt::format("bad sector id '{}'", s.id));
      if (!find_commodity_group(s.group)) {
        fail(fmt::format("sector {} has unknown commodity group '{}'", s.id, s.group));
      }
      wt += s.group == "water_transport";
      if (!(s.armington_sigma > 0.0)) fail(fmt::format("sector {} needs sigma > 0", s.id));
      if (!(s.output_weight > 0.0)) fail(fmt::format("sector {} needs output_weight > 0", s.id));
    }
    if (wt != 1) fail("exactly one sector must belong to the water_transport group");
    if (!(top_sigma > 0.0)) fail("top_sigma must be > 0");
    if (!(dual_container_weight >= 0.0 && dual_container_weight <= 1.0)) {
      fail("dual_container_weight must lie in [0, 1]");
    }
    if (!numeraire_region.empty() && region_index(numeraire_region) >= regions.size()) {
      fail(fmt::format("unknown numeraire region '{}'", numeraire_region));
    }
    if (!(numeraire_price > 0.0)) fail("numeraire_price must be > 0");
    if (!(water_transport_gdp_share > 0.0 && water_transport_gdp_share < 0.2)) {
      fail("water_transport_gdp_share must lie in (0, 0.2)");
    }
    if (!(solver.tolerance > 0.0) || solver.max_iterations < 1 || !(solver.fd_step > 0.0)) {
      fail("invalid solver options");
    }
  }

  std::size_t region_index(const std::string& id) const {
    for (std::size_t k = 0; k < regions.size(); ++k) {
      if (regions[k].id == id) return k;
    }
    return regions.size();
  }

  std::size_t sector_index(const std::string& id) const {
    for (std::size_t k = 0; k < sectors.size(); ++k) {
      if (sectors[k].id == id) return k;
    }
    return sectors.size();
  }

  std::size_t water_transport_index() const {
    for (std::size_t k = 0; k < sectors.size(); ++k) {
      if (sectors[k].group == "water_transport") return k;
    }
    return sectors.size();
  }

  std::size_t numeraire_index() const {
    return numeraire_region.empty() ? 0 : region_index(numeraire_region);
  }

  VesselAssignment assignment(std::size_t sector) const {
    return find_commodity_group(sectors[sector].group)->assignment;
  }

  /// Model region for an ISO-3 country code.
  const std::string& region_of(const std::string& country) const {
    const RegionSpec* fallback = nullptr;
    for (const auto& r : regions) {
      for (const auto& c : r.members) {
        if (c == country) return r.id;
      }
      if (r.catch_all) fallback = &r;
    }
    if (!fallback) {
      throw CgeError(CgeErrorKind::InvalidConfig,
                     fmt::format("country {} belongs to no region", country));
    }
    return fallback->id;
  }
};

}  // namespace bwi::cge
