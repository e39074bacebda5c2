#pragma once

// Trade value changes back to voyages. With a constant value/weight ratio
// per route, a value change maps to a change in allocated DWT, and dividing
// by the route's average vessel DWT gives the change in voyages.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bwi/baseline_cost.hpp"
#include "bwi/common/csv.hpp"
#include "bwi/common/error.hpp"
#include "bwi/compliance_cost.hpp"
#include "bwi/movement_ingest.hpp"

namespace bwi {

enum class TrafficErrorKind { ZeroDwt, InvalidInput };
using TrafficError = KindedError<TrafficErrorKind>;

struct RouteStats {
  CellKey route;
  double trade_value = 0.0;    // $
  double allocated_dwt = 0.0;  // voyages * avg_dwt, tonnes
  double voyages = 0.0;
  double avg_dwt = 0.0;  // tonnes per vessel
  double alpha = 0.6;    // utilisation
};

/// $ of cargo per tonne of utilised DWT.
inline double value_weight_ratio(const RouteStats& s) {
  if (!(s.allocated_dwt > 0.0)) {
    throw TrafficError(TrafficErrorKind::ZeroDwt,
                       fmt::format("route {}->{} {} has no allocated DWT", s.route.origin,
                                   s.route.dest, to_string(s.route.type)));
  }
  if (!(s.alpha > 0.0 && s.alpha <= 1.0)) {
    throw TrafficError(TrafficErrorKind::InvalidInput, "alpha must lie in (0, 1]");
  }
  return s.trade_value / (s.allocated_dwt * s.alpha);
}

inline double dwt_delta(double trade_value_delta, double ratio, double alpha) {
  if (!(ratio > 0.0)) throw TrafficError(TrafficErrorKind::InvalidInput, "ratio must be > 0");
  return trade_value_delta / (ratio * alpha);
}

inline double fractional_voyages(double delta_dwt, double avg_dwt) {
  if (!(avg_dwt > 0.0)) throw TrafficError(TrafficErrorKind::InvalidInput, "avg_dwt must be > 0");
  return delta_dwt / avg_dwt;
}

/// Rounds toward zero; values within floating-point noise of an integer
/// count as that integer, so an exact vessel-load is one voyage.
inline long long whole_voyages(double fractional) {
  const double nearest = std::round(fractional);
  if (std::abs(fractional - nearest) <= 1e-9 * std::max(1.0, std::abs(nearest))) {
    return static_cast<long long>(nearest);
  }
  return static_cast<long long>(std::trunc(fractional));
}

/// Whole voyages: less than a full vessel-load of change moves no voyage.
inline long long voyage_delta(double delta_dwt, double avg_dwt) {
  return whole_voyages(fractional_voyages(delta_dwt, avg_dwt));
}

/// Route statistics by (origin, dest, type) from one year of movements.
/// Average DWT covers vessels with a recorded DWT; routes without any are
/// omitted. `trade_value` is left for the caller.
inline std::map<CellKey, RouteStats> route_stats(
    std::span<const VoyageRecord> voyages, const VesselRegistry& vessels,
    const std::function<std::string(const std::string&)>& region_of,
    const std::map<VesselType, double>& alpha, double default_alpha = 0.6) {
  struct Acc {
    double voyages = 0.0, dwt_sum = 0.0, dwt_count = 0.0;
  };
  std::map<CellKey, Acc> acc;
  for (const auto& v : voyages) {
    const std::string o = region_of(v.origin_country);
    const std::string d = region_of(v.dest_country);
    if (o == d) continue;
    const auto& vessel = vessels.at(v.vessel_id);
    auto& a = acc[CellKey{o, d, vessel.vessel_type}];
    a.voyages += 1.0;
    if (vessel.dwt) {
      a.dwt_sum += *vessel.dwt;
      a.dwt_count += 1.0;
    }
  }
  std::map<CellKey, RouteStats> out;
  for (const auto& [key, a] : acc) {
    if (a.dwt_count == 0.0) continue;
    RouteStats s;
    s.route = key;
    s.voyages = a.voyages;
    s.avg_dwt = a.dwt_sum / a.dwt_count;
    s.allocated_dwt = s.voyages * s.avg_dwt;
    const auto it = alpha.find(key.type);
    s.alpha = it == alpha.end() ? default_alpha : it->second;
    out.emplace(key, s);
  }
  return out;
}

/// One commodity's value change on a route, already attributed to a type.
struct ValueChange {
  CellKey route;
  double value_delta = 0.0;  // $
};

struct TrafficDelta {
  CellKey route;
  Scenario scenario = Scenario::Consistent;
  double delta_dwt = 0.0;
  double fractional = 0.0;  // pre-rounding voyage change
  long long delta_voyages = 0;
  long long current_voyages = 0;

  double pct() const {
    return current_voyages > 0 ? 100.0 * static_cast<double>(delta_voyages) / current_voyages
                               : 0.0;
  }
};

/// Converts each commodity's change on its route separately, sums the
/// fractional voyages per route, then rounds. Changes on routes without
/// statistics are ignored.
inline std::vector<TrafficDelta> traffic_deltas(const std::map<CellKey, RouteStats>& stats,
                                                std::span<const ValueChange> changes,
                                                Scenario scenario) {
  std::map<CellKey, TrafficDelta> acc;
  for (const auto& c : changes) {
    const auto it = stats.find(c.route);
    if (it == stats.end() || !(it->second.trade_value > 0.0)) continue;
    const RouteStats& s = it->second;
    const double ratio = value_weight_ratio(s);
    const double ddwt = dwt_delta(c.value_delta, ratio, s.alpha);
    auto& d = acc[c.route];
    d.route = c.route;
    d.scenario = scenario;
    d.delta_dwt += ddwt;
    d.fractional += fractional_voyages(ddwt, s.avg_dwt);
  }
  std::vector<TrafficDelta> out;
  for (auto& [key, d] : acc) {
    d.delta_voyages = whole_voyages(d.fractional);
    d.current_voyages = std::llround(stats.at(key).voyages);
    out.push_back(d);
  }
  return out;
}

inline const std::vector<std::string>& traffic_csv_header() {
  static const std::vector<std::string> h = {"origin",          "dest",           "vessel_type",
                                             "scenario",        "current_voyages", "delta_voyages",
                                             "pct"};
  return h;
}

inline void write_traffic_rows(csv::Writer& w, std::string_view scenario,
                               std::span<const TrafficDelta> deltas) {
  for (const auto& d : deltas) {
    w.row(d.route.origin, d.route.dest, std::string(to_string(d.route.type)), scenario,
          d.current_voyages, d.delta_voyages, d.pct());
  }
}

// ---------------------------------------------------------------------------
// Table-style report of large traffic changes

struct TrafficCell {
  long long current = 0;
  std::array<std::optional<long long>, 2> reduced;  // -delta, per scenario
  std::array<double, 2> pct{};  // reduction as a share of current voyages
};

struct TrafficReportRow {
  std::string origin;
  std::string dest;
  std::map<VesselType, TrafficCell> cells;
};

struct TrafficReport {
  long long min_voyages = 0;
  std::vector<Scenario> scenarios;
  std::vector<VesselType> columns;
  std::vector<TrafficReportRow> rows;
};

/// Pairs on which some vessel type's voyage change reaches `min_voyages` in
/// magnitude in either scenario.
inline TrafficReport traffic_report(std::span<const TrafficDelta> deltas, long long min_voyages,
                                    std::span<const Scenario> scenarios = kAllScenarios) {
  if (min_voyages < 0) throw TrafficError(TrafficErrorKind::InvalidInput, "min_voyages must be >= 0");
  std::map<std::pair<std::string, std::string>, TrafficReportRow> rows;
  std::map<std::pair<std::string, std::string>, bool> include;
  for (const auto& d : deltas) {
    const auto pair = std::make_pair(d.route.origin, d.route.dest);
    auto& row = rows[pair];
    row.origin = d.route.origin;
    row.dest = d.route.dest;
    auto& cell = row.cells[d.route.type];
    const int s = static_cast<int>(d.scenario);
    cell.current = d.current_voyages;
    cell.reduced[s] = -d.delta_voyages;
    cell.pct[s] = d.delta_voyages == 0 ? 0.0 : -d.pct();
    if (std::llabs(d.delta_voyages) >= min_voyages) include[pair] = true;
  }
  TrafficReport out;
  out.min_voyages = min_voyages;
  out.scenarios.assign(scenarios.begin(), scenarios.end());
  for (auto& [pair, row] : rows) {
    if (include[pair]) out.rows.push_back(std::move(row));
  }
  std::set<VesselType> used;
  for (const auto& row : out.rows) {
    for (const auto& [t, c] : row.cells) used.insert(t);
  }
  out.columns.assign(used.begin(), used.end());
  return out;
}

inline std::string render_markdown(const TrafficReport& r) {
  std::string out = fmt::format(
      "# Changes in shipping voyages by route\n\n"
      "Routes where some vessel type changes by {} or more voyages. Reduced = voyages "
      "removed (negative means added); % = reduction as a share of current voyages, one decimal.\n\n",
      r.min_voyages);
  out += "| Route |";
  for (const auto t : r.columns) {
    out += fmt::format(" {} current |", to_string(t));
    for (const Scenario s : r.scenarios) {
      out += fmt::format(" {} {} reduced | {} {} % |", to_string(t), to_string(s), to_string(t),
                         to_string(s));
    }
  }
  out += "\n|---|";
  for (std::size_t k = 0; k < r.columns.size() * (1 + 2 * r.scenarios.size()); ++k) out += "---:|";
  out += "\n";
  for (const auto& row : r.rows) {
    out += fmt::format("| {}/{} |", row.origin, row.dest);
    for (const auto t : r.columns) {
      const auto it = row.cells.find(t);
      if (it == row.cells.end()) {
        out += " - |";
        for (std::size_t k = 0; k < r.scenarios.size(); ++k) out += " - | - |";
        continue;
      }
      out += fmt::format(" {} |", it->second.current);
      for (const Scenario sc : r.scenarios) {
        const int s = static_cast<int>(sc);
        if (it->second.reduced[s]) {
          out += fmt::format(" {} | {:.1f} |", *it->second.reduced[s], it->second.pct[s]);
        } else {
          out += " - | - |";
        }
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace bwi
