#pragma once

// Cost shocks into margin multipliers, and the trade, welfare and macro
// comparisons between a benchmark and a counterfactual equilibrium.

#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bwi/baseline_cost.hpp"
#include "bwi/cge/model.hpp"
#include "bwi/common/csv.hpp"
#include "bwi/compliance_cost.hpp"

namespace bwi::cge {

/// Margin multiplier per traded route; routes not listed keep their rate.
using ShockSet = std::map<RouteKey, double>;

/// Percentage change for one route and vessel type. A route without traffic
/// of that type takes the mean over the type's routes into the same
/// destination, then the type's mean over all routes; no data means 0.
inline double route_type_pct(const PctTable& pct, const std::string& origin,
                             const std::string& dest, VesselType type) {
  const auto it = pct.find(CellKey{origin, dest, type});
  if (it != pct.end()) return it->second;
  double dest_sum = 0.0, all_sum = 0.0;
  int dest_n = 0, all_n = 0;
  for (const auto& [key, p] : pct) {
    if (key.type != type) continue;
    all_sum += p;
    ++all_n;
    if (key.dest == dest) {
      dest_sum += p;
      ++dest_n;
    }
  }
  if (dest_n > 0) return dest_sum / dest_n;
  return all_n > 0 ? all_sum / all_n : 0.0;
}

/// Multiplier for one route and sector from region-level cost changes.
/// A single-type sector takes 1 + pct/100 of its vessel type; a
/// container/bulk sector mixes the two types with the configured weight.
inline double route_multiplier(const EconomyConfig& cfg, std::size_t sector,
                               const std::string& origin, const std::string& dest,
                               const PctTable& pct) {
  const VesselAssignment a = cfg.assignment(sector);
  if (a.carriage == Carriage::None) {
    throw CgeError(CgeErrorKind::UnmappedSector,
                   fmt::format("sector {} is traded but has no vessel type", cfg.sectors[sector].id));
  }
  if (a.carriage == Carriage::Single) {
    return 1.0 + route_type_pct(pct, origin, dest, a.type) / 100.0;
  }
  const double wc = cfg.dual_container_weight;
  return 1.0 + (wc * route_type_pct(pct, origin, dest, VesselType::Container) +
                (1.0 - wc) * route_type_pct(pct, origin, dest, VesselType::Bulk)) /
                   100.0;
}

inline ShockSet map_shocks(const CgeModel& m, const PctTable& region_pct) {
  ShockSet out;
  for (std::size_t s = 0; s < m.R; ++s) {
    for (std::size_t r = 0; r < m.R; ++r) {
      for (std::size_t i = 0; i < m.S; ++i) {
        if (m.fob0[m.route(s, r, i)] <= 0.0) continue;
        out[RouteKey{m.region(s), m.region(r), m.sector(i)}] =
            route_multiplier(m.config, i, m.region(s), m.region(r), region_pct);
      }
    }
  }
  return out;
}

/// Same percentage change on every route of one sector.
inline ShockSet uniform_sector_shock(const CgeModel& m, const std::string& sector, double pct) {
  ShockSet out;
  const std::size_t i = m.config.sector_index(sector);
  for (std::size_t s = 0; s < m.R; ++s) {
    for (std::size_t r = 0; r < m.R; ++r) {
      if (m.fob0[m.route(s, r, i)] > 0.0) {
        out[RouteKey{m.region(s), m.region(r), sector}] = 1.0 + pct / 100.0;
      }
    }
  }
  return out;
}

inline std::vector<double> apply_shocks(const CgeModel& m, const ShockSet& shocks) {
  std::vector<double> margins = m.margin0;
  for (const auto& [key, mult] : shocks) {
    const std::size_t s = m.config.region_index(key.origin);
    const std::size_t r = m.config.region_index(key.dest);
    const std::size_t i = m.config.sector_index(key.sector);
    if (s >= m.R || r >= m.R || i >= m.S) {
      throw CgeError(CgeErrorKind::InvalidConfig,
                     fmt::format("shock on unknown route {}->{} {}", key.origin, key.dest,
                                 key.sector));
    }
    margins[m.route(s, r, i)] *= mult;
  }
  return margins;
}

// ---------------------------------------------------------------------------

struct RouteTrade {
  RouteKey key;
  double benchmark = 0.0;  // real FOB exports
  double counterfactual = 0.0;

  double change() const { return counterfactual - benchmark; }
  double pct() const { return 100.0 * change() / benchmark; }
};

struct RegionTrade {
  std::string region;
  double exports_benchmark = 0.0;  // real, FOB
  double exports_counterfactual = 0.0;
  double imports_benchmark = 0.0;  // real, CIF
  double imports_counterfactual = 0.0;

  double export_change() const { return exports_counterfactual - exports_benchmark; }
  double import_change() const { return imports_counterfactual - imports_benchmark; }
  double export_pct() const { return 100.0 * export_change() / exports_benchmark; }
  double import_pct() const { return 100.0 * import_change() / imports_benchmark; }
};

struct TradeDeltas {
  std::vector<RouteTrade> routes;  // routes with benchmark trade, (origin, dest, sector) order
  std::vector<RegionTrade> regions;
};

/// Real values are quantities at the calibration's unit prices, so they do
/// not depend on the numeraire's level.
inline TradeDeltas trade_deltas(const CgeModel& m, const Equilibrium& benchmark,
                                const Equilibrium& counterfactual) {
  TradeDeltas out;
  out.regions.resize(m.R);
  for (std::size_t r = 0; r < m.R; ++r) out.regions[r].region = m.region(r);
  for (std::size_t s = 0; s < m.R; ++s) {
    for (std::size_t r = 0; r < m.R; ++r) {
      for (std::size_t i = 0; i < m.S; ++i) {
        const std::size_t q = m.route(s, r, i);
        if (m.fob0[q] <= 0.0) continue;
        out.routes.push_back({RouteKey{m.region(s), m.region(r), m.sector(i)},
                              benchmark.exports[q], counterfactual.exports[q]});
        out.regions[s].exports_benchmark += benchmark.exports[q];
        out.regions[s].exports_counterfactual += counterfactual.exports[q];
        out.regions[r].imports_benchmark += benchmark.quantity[q];
        out.regions[r].imports_counterfactual += counterfactual.quantity[q];
      }
    }
  }
  return out;
}

/// Equivalent variation per region, valued at the calibration's unit prices:
/// with Cobb-Douglas utility normalised so e(1, u) = u, EV = u1 - u0.
inline std::vector<double> welfare_ev(const CgeModel& m, const Equilibrium& benchmark,
                                      const Equilibrium& counterfactual) {
  std::vector<double> ev(m.R);
  for (std::size_t r = 0; r < m.R; ++r) ev[r] = counterfactual.utility[r] - benchmark.utility[r];
  return ev;
}

struct MacroRow {
  std::string region;
  double gdp_pct = 0.0;
  double cpi_pct = 0.0;
  double ev = 0.0;  // SAM money units
};

/// Expenditure-side GDP at unit prices: final demand + exports (FOB) +
/// transport services sold to the pool - imports (CIF).
inline double real_gdp(const CgeModel& m, const Equilibrium& e, std::size_t r) {
  double gdp = e.y[m.ri(r, m.wt)];
  for (std::size_t i = 0; i < m.S; ++i) {
    const std::size_t k = m.ri(r, i);
    gdp += e.consumption[k] + e.government[k] + e.investment[k];
    for (std::size_t d = 0; d < m.R; ++d) {
      gdp += e.exports[m.route(r, d, i)];
      gdp -= e.quantity[m.route(d, r, i)];
    }
  }
  return gdp;
}

/// Household true cost-of-living index.
inline double consumer_price_index(const CgeModel& m, const Equilibrium& e, std::size_t r) {
  double log_p = 0.0;
  for (std::size_t i = 0; i < m.S; ++i) {
    const std::size_t k = m.ri(r, i);
    if (m.share_c[k] > 0.0) log_p += m.share_c[k] * std::log(e.pa[k]);
  }
  return std::exp(log_p);
}

inline std::vector<MacroRow> macro_report(const CgeModel& m, const Equilibrium& benchmark,
                                          const Equilibrium& counterfactual) {
  const auto ev = welfare_ev(m, benchmark, counterfactual);
  std::vector<MacroRow> out;
  for (std::size_t r = 0; r < m.R; ++r) {
    const double g0 = real_gdp(m, benchmark, r);
    const double p0 = consumer_price_index(m, benchmark, r);
    out.push_back({m.region(r), 100.0 * (real_gdp(m, counterfactual, r) - g0) / g0,
                   100.0 * (consumer_price_index(m, counterfactual, r) - p0) / p0, ev[r]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

inline const std::vector<std::string>& trade_csv_header() {
  static const std::vector<std::string> h = {"origin",     "dest",      "sector",
                                             "scenario",   "pct_change", "value_change_musd"};
  return h;
}

inline const std::vector<std::string>& macro_csv_header() {
  static const std::vector<std::string> h = {"region", "scenario", "gdp_pct", "cpi_pct",
                                             "ev_musd"};
  return h;
}

inline void write_trade_rows(csv::Writer& w, std::string_view scenario, const TradeDeltas& d) {
  for (const auto& r : d.routes) {
    w.row(r.key.origin, r.key.dest, r.key.sector, scenario, r.pct(), r.change());
  }
}

inline void write_macro_rows(csv::Writer& w, std::string_view scenario,
                             std::span<const MacroRow> rows) {
  for (const auto& r : rows) w.row(r.region, scenario, r.gdp_pct, r.cpi_pct, r.ev);
}

}  // namespace bwi::cge
