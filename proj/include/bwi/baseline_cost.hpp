#pragma once

// Baseline (no-regulation) voyage cost from daily cost schedules, and the
// directed country-pair x vessel-type cost shock matrix built from it.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "bwi/common/csv.hpp"
#include "bwi/common/error.hpp"
#include "bwi/compliance_cost.hpp"
#include "bwi/movement_ingest.hpp"
#include "bwi/vessel_type.hpp"

namespace bwi {

enum class BaselineErrorKind { MissingBucket, InvalidTable, MalformedRow };
using BaselineError = KindedError<BaselineErrorKind>;

struct DailyCostRow {
  VesselType type = VesselType::Container;
  double dwt_min = 0.0;  // exclusive
  double dwt_max = 0.0;  // inclusive
  double capital = 0.0;  // all $/day
  double operating = 0.0;
  double voyage = 0.0;
  double maintenance = 0.0;

  double total() const { return capital + operating + voyage + maintenance; }
};

/// Daily cost schedules keyed by vessel type and DWT bucket. Each type's
/// buckets partition (0, inf). A vessel without DWT uses the middle bucket.
class DailyCostTable {
 public:
  DailyCostTable() = default;

  explicit DailyCostTable(std::vector<DailyCostRow> rows) : rows_(std::move(rows)) {
    std::stable_sort(rows_.begin(), rows_.end(), [](const auto& a, const auto& b) {
      return a.type != b.type ? a.type < b.type : a.dwt_min < b.dwt_min;
    });
    for (const auto& r : rows_) {
      for (const double v : {r.capital, r.operating, r.voyage, r.maintenance}) {
        if (!(v >= 0.0) || !std::isfinite(v)) fail("daily cost entries must be finite and >= 0");
      }
    }
    for (const VesselType t : kAllVesselTypes) {
      const auto b = buckets(t);
      if (b.empty()) continue;
      if (b.front().dwt_min != 0.0) fail(fmt::format("{} buckets must start at 0", to_string(t)));
      if (!std::isinf(b.back().dwt_max)) {
        fail(fmt::format("{} buckets must end at inf", to_string(t)));
      }
      for (std::size_t k = 0; k < b.size(); ++k) {
        if (!(b[k].dwt_max > b[k].dwt_min)) fail("empty DWT bucket");
        if (k + 1 < b.size() && b[k].dwt_max != b[k + 1].dwt_min) {
          fail(fmt::format("{} buckets leave a gap or overlap at {}", to_string(t), b[k].dwt_max));
        }
      }
    }
  }

  std::span<const DailyCostRow> buckets(VesselType t) const {
    const auto lo = std::find_if(rows_.begin(), rows_.end(), [t](auto& r) { return r.type == t; });
    const auto hi = std::find_if(lo, rows_.end(), [t](auto& r) { return r.type != t; });
    return {lo, hi};
  }

  const DailyCostRow& lookup(VesselType t, std::optional<double> dwt) const {
    const auto b = buckets(t);
    if (b.empty()) {
      throw BaselineError(BaselineErrorKind::MissingBucket,
                          fmt::format("no daily cost rows for vessel type {}", to_string(t)));
    }
    if (!dwt) return b[b.size() / 2];
    for (const auto& r : b) {
      if (*dwt > r.dwt_min && *dwt <= r.dwt_max) return r;
    }
    throw BaselineError(BaselineErrorKind::MissingBucket,
                        fmt::format("no {} bucket for DWT {}", to_string(t), *dwt));
  }

  const std::vector<DailyCostRow>& rows() const { return rows_; }

 private:
  [[noreturn]] static void fail(const std::string& what) {
    throw BaselineError(BaselineErrorKind::InvalidTable, "daily cost table: " + what);
  }

  std::vector<DailyCostRow> rows_;
};

inline const std::vector<std::string>& daily_cost_csv_header() {
  static const std::vector<std::string> h = {"vessel_type",     "dwt_min",
                                             "dwt_max",         "capital_per_day",
                                             "operating_per_day", "voyage_per_day",
                                             "maintenance_per_day"};
  return h;
}

inline DailyCostTable load_daily_costs(std::istream& in) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::read(in, daily_cost_csv_header());
  } catch (const csv::CsvError& e) {
    throw BaselineError(BaselineErrorKind::MalformedRow, e.what());
  }
  std::vector<DailyCostRow> out;
  for (const auto& row : rows) {
    const auto type = parse_vessel_type(row[0]);
    if (!type) {
      throw BaselineError(BaselineErrorKind::MalformedRow,
                          fmt::format("line {}: unknown vessel type '{}'", row.line, row[0]));
    }
    std::array<double, 6> v{};
    for (std::size_t k = 0; k < 6; ++k) {
      const auto x = csv::parse_double(row[k + 1]);
      if (!x) {
        throw BaselineError(BaselineErrorKind::MalformedRow,
                            fmt::format("line {}: '{}' is not a number", row.line, row[k + 1]));
      }
      v[k] = *x;
    }
    out.push_back({*type, v[0], v[1], v[2], v[3], v[4], v[5]});
  }
  return DailyCostTable(std::move(out));
}

inline void write_daily_costs(std::ostream& out, const DailyCostTable& table) {
  csv::Writer w(out);
  w.row(daily_cost_csv_header());
  for (const auto& r : table.rows()) {
    w.row(std::string(to_string(r.type)), r.dwt_min, r.dwt_max, r.capital, r.operating,
          r.voyage, r.maintenance);
  }
}

/// Desk-scale schedules: five DWT buckets for each of container, bulk and
/// tanker. Daily totals grow as DWT^0.55 from a per-type anchor; component
/// splits vary by type around the 42/14/40/4 capital/operating/voyage/
/// maintenance pattern.
inline DailyCostTable synthetic_daily_cost_table() {
  struct TypeSpec {
    VesselType type;
    std::array<double, 4> breaks;  // interior bucket edges
    double anchor_daily;           // $/day at 50,000 DWT
    std::array<double, 4> shares;  // capital, operating, voyage, maintenance
  };
  const std::array<TypeSpec, 3> specs = {{
      {VesselType::Container, {15000, 35000, 60000, 90000}, 55000, {0.44, 0.13, 0.39, 0.04}},
      {VesselType::Bulk, {20000, 45000, 80000, 130000}, 23000, {0.40, 0.15, 0.41, 0.04}},
      {VesselType::Tanker, {20000, 50000, 90000, 150000}, 18500, {0.41, 0.14, 0.40, 0.05}},
  }};
  std::vector<DailyCostRow> rows;
  for (const auto& s : specs) {
    std::array<double, 6> edges = {0.0, s.breaks[0], s.breaks[1], s.breaks[2], s.breaks[3],
                                   std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < 5; ++k) {
      const double rep = k == 0 ? 0.6 * edges[1] : k == 4 ? 1.4 * edges[4]
                                                          : 0.5 * (edges[k] + edges[k + 1]);
      const double total = s.anchor_daily * std::pow(rep / 50000.0, 0.55);
      rows.push_back({s.type, edges[k], edges[k + 1], total * s.shares[0], total * s.shares[1],
                      total * s.shares[2], total * s.shares[3]});
    }
  }
  return DailyCostTable(std::move(rows));
}

inline double voyage_baseline_cost(const VoyageRecord& voyage, const VesselRecord& vessel,
                                   const DailyCostTable& table) {
  return table.lookup(vessel.vessel_type, vessel.dwt).total() * voyage.duration_days;
}

struct ComponentShares {
  double capital = 0.0;
  double operating = 0.0;
  double voyage = 0.0;
  double maintenance = 0.0;
};

/// Cost-weighted component shares over a fleet's voyage-days.
inline ComponentShares fleet_component_shares(std::span<const VoyageRecord> voyages,
                                              const VesselRegistry& vessels,
                                              const DailyCostTable& table) {
  ComponentShares s;
  for (const auto& v : voyages) {
    const auto& vessel = vessels.at(v.vessel_id);
    const auto& r = table.lookup(vessel.vessel_type, vessel.dwt);
    s.capital += r.capital * v.duration_days;
    s.operating += r.operating * v.duration_days;
    s.voyage += r.voyage * v.duration_days;
    s.maintenance += r.maintenance * v.duration_days;
  }
  const double total = s.capital + s.operating + s.voyage + s.maintenance;
  if (total > 0.0) {
    s.capital /= total;
    s.operating /= total;
    s.voyage /= total;
    s.maintenance /= total;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Cost shock matrix

struct CellKey {
  std::string origin;
  std::string dest;
  VesselType type = VesselType::Container;

  auto operator<=>(const CellKey&) const = default;
};

struct CostCell {
  std::size_t voyages = 0;
  double baseline_total = 0.0;
  std::array<double, 2> compliance_total{};  // indexed by Scenario

  double compliance(Scenario s) const { return compliance_total[static_cast<int>(s)]; }
  double pct(Scenario s) const { return 100.0 * compliance(s) / baseline_total; }
};

/// Directed cells; a pair without traffic for a type has no entry.
using CostShockMatrix = std::map<CellKey, CostCell>;

/// Percentage cost change per cell for one scenario.
using PctTable = std::map<CellKey, double>;

struct VoyageCostLine {
  std::string origin;
  std::string dest;
  VesselType type = VesselType::Container;
  double baseline = 0.0;
  std::array<double, 2> compliance{};
};

/// Cell sums in input order, so results are reproducible bit for bit.
inline CostShockMatrix aggregate_pairs(std::span<const VoyageCostLine> lines) {
  CostShockMatrix m;
  for (const auto& l : lines) {
    auto& c = m[CellKey{l.origin, l.dest, l.type}];
    ++c.voyages;
    c.baseline_total += l.baseline;
    c.compliance_total[0] += l.compliance[0];
    c.compliance_total[1] += l.compliance[1];
  }
  return m;
}

/// Re-keys cells onto model regions, dropping flows internal to a region.
inline CostShockMatrix aggregate_to_regions(
    const CostShockMatrix& m, const std::function<std::string(const std::string&)>& region_of) {
  CostShockMatrix out;
  for (const auto& [key, cell] : m) {
    const std::string o = region_of(key.origin);
    const std::string d = region_of(key.dest);
    if (o == d) continue;
    auto& c = out[CellKey{o, d, key.type}];
    c.voyages += cell.voyages;
    c.baseline_total += cell.baseline_total;
    c.compliance_total[0] += cell.compliance_total[0];
    c.compliance_total[1] += cell.compliance_total[1];
  }
  return out;
}

inline PctTable pct_table(const CostShockMatrix& m, Scenario s) {
  PctTable out;
  for (const auto& [key, cell] : m) {
    if (cell.baseline_total > 0.0) out.emplace(key, cell.pct(s));
  }
  return out;
}

inline const std::vector<std::string>& shocks_csv_header() {
  static const std::vector<std::string> h = {"origin", "dest", "vessel_type", "scenario",
                                             "pct_change"};
  return h;
}

inline void write_shocks(std::ostream& out, const CostShockMatrix& m,
                         std::span<const Scenario> scenarios) {
  csv::Writer w(out);
  w.row(shocks_csv_header());
  for (const Scenario s : scenarios) {
    for (const auto& [key, pct] : pct_table(m, s)) {
      w.row(key.origin, key.dest, std::string(to_string(key.type)), std::string(to_string(s)),
            pct);
    }
  }
}

inline std::map<Scenario, PctTable> read_shocks(std::istream& in) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::read(in, shocks_csv_header());
  } catch (const csv::CsvError& e) {
    throw BaselineError(BaselineErrorKind::MalformedRow, e.what());
  }
  std::map<Scenario, PctTable> out;
  for (const auto& row : rows) {
    const auto type = parse_vessel_type(row[2]);
    const auto scenario = parse_scenario(row[3]);
    const auto pct = csv::parse_double(row[4]);
    if (!type || !scenario || !pct) {
      throw BaselineError(BaselineErrorKind::MalformedRow,
                          fmt::format("shocks line {}: bad field", row.line));
    }
    out[*scenario][CellKey{row[0], row[1], *type}] = *pct;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Table-style report of large cost changes

struct ShockDisplay {
  int pct = 0;            // rounded to integer; positive values below 1 show as 1
  long long kusd = 0;     // compliance cost, thousands of dollars
};

struct ShockReportRow {
  std::string origin;
  std::string dest;
  std::map<VesselType, std::array<ShockDisplay, 2>> cells;  // absent type = no traffic
};

struct ShockReport {
  double threshold_pct = 0.0;
  std::vector<Scenario> scenarios;
  std::vector<VesselType> columns;
  std::vector<ShockReportRow> rows;
};

inline int display_pct(double pct) {
  if (pct > 0.0 && pct < 1.0) return 1;
  return static_cast<int>(std::llround(pct));
}

/// Directed pairs in which some vessel type's cost change reaches the
/// threshold in one of the listed scenarios.
inline ShockReport shock_report(const CostShockMatrix& m, double threshold_pct,
                                std::span<const Scenario> scenarios = kAllScenarios) {
  if (threshold_pct < 0.0) {
    throw BaselineError(BaselineErrorKind::InvalidTable, "threshold must be >= 0");
  }
  ShockReport report;
  report.threshold_pct = threshold_pct;
  report.scenarios.assign(scenarios.begin(), scenarios.end());
  std::map<std::pair<std::string, std::string>, std::vector<const decltype(m.begin())::value_type*>>
      pairs;
  std::set<VesselType> types;
  for (const auto& entry : m) {
    pairs[{entry.first.origin, entry.first.dest}].push_back(&entry);
    types.insert(entry.first.type);
  }
  report.columns.assign(types.begin(), types.end());
  for (const auto& [pair, cells] : pairs) {
    bool include = false;
    ShockReportRow row{pair.first, pair.second, {}};
    for (const auto* entry : cells) {
      const CostCell& c = entry->second;
      std::array<ShockDisplay, 2> shown{};
      for (const Scenario s : scenarios) {
        const double pct = c.pct(s);
        if (pct >= threshold_pct) include = true;
        shown[static_cast<int>(s)] = {display_pct(pct),
                                      std::llround(c.compliance(s) / 1000.0)};
      }
      row.cells.emplace(entry->first.type, shown);
    }
    if (include) report.rows.push_back(std::move(row));
  }
  return report;
}

inline std::string render_markdown(const ShockReport& r) {
  std::string out = fmt::format(
      "# Changes in shipping costs by country pair\n\n"
      "Pairs with at least a {}% change in cost for one vessel type. Percentages are "
      "rounded to integers (positive changes below 1% show as 1); dollars are compliance "
      "costs in thousands. '-' marks a vessel type with no traffic on the pair.\n\n",
      csv::num(r.threshold_pct));
  out += "| Pair |";
  for (const auto t : r.columns) {
    for (const Scenario s : r.scenarios) {
      out += fmt::format(" {} {} % | {} {} $k |", to_string(t), to_string(s), to_string(t),
                         to_string(s));
    }
  }
  out += "\n|---|";
  for (std::size_t k = 0; k < r.columns.size() * r.scenarios.size() * 2; ++k) out += "---:|";
  out += "\n";
  for (const auto& row : r.rows) {
    out += fmt::format("| {}/{} |", row.origin, row.dest);
    for (const auto t : r.columns) {
      const auto it = row.cells.find(t);
      for (const Scenario sc : r.scenarios) {
        const int s = static_cast<int>(sc);
        if (it == row.cells.end()) {
          out += " - | - |";
        } else {
          out += fmt::format(" {} | {} |", it->second[s].pct, it->second[s].kusd);
        }
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace bwi
