#pragma once

// The run pipeline: ingest -> costs -> shocks -> solve -> traffic -> report.
// Every stage reads its inputs from files (the configured data files or an
// earlier stage's CSV) and writes its outputs into the bundle directory, so
// each can be re-run on its own.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "bwi/ballast_discharge.hpp"
#include "bwi/baseline_cost.hpp"
#include "bwi/cge/model.hpp"
#include "bwi/cge/results.hpp"
#include "bwi/cge/sam.hpp"
#include "bwi/common/csv.hpp"
#include "bwi/common/error.hpp"
#include "bwi/common/hash.hpp"
#include "bwi/compliance_cost.hpp"
#include "bwi/movement_ingest.hpp"
#include "bwi/scenario/config.hpp"
#include "bwi/scenario/world.hpp"
#include "bwi/traffic_model.hpp"

namespace bwi {

inline constexpr std::string_view kVersion = "1.0.0";

enum class PipelineErrorKind { MissingInput, OutputExists, WorldMismatch, Malformed };
using PipelineError = KindedError<PipelineErrorKind>;

/// A stage failure; keeps the category (validation or solver) of its cause.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.category(), fmt::format("stage {}: {}", stage, cause.what())),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

namespace fs = std::filesystem;

namespace files {
inline constexpr const char* kVoyages = "voyages.csv";
inline constexpr const char* kHistories = "histories.csv";
inline constexpr const char* kIngestStats = "ingest_stats.csv";
inline constexpr const char* kVoyageCosts = "voyage_costs.csv";
inline constexpr const char* kBaselineCosts = "baseline_costs.csv";
inline constexpr const char* kCostParams = "cost_params.csv";
inline constexpr const char* kCostCells = "cost_cells.csv";
inline constexpr const char* kCostSummary = "cost_summary.csv";
inline constexpr const char* kShocks = "shocks.csv";
inline constexpr const char* kShockReport = "shock_report.md";
inline constexpr const char* kResultsTrade = "results_trade.csv";
inline constexpr const char* kResultsMacro = "results_macro.csv";
inline constexpr const char* kSolver = "solver.csv";
inline constexpr const char* kTradeReport = "trade_report.md";
inline constexpr const char* kMacroReport = "macro_report.md";
inline constexpr const char* kTrafficDeltas = "traffic_deltas.csv";
inline constexpr const char* kTrafficReport = "traffic_report.md";
inline constexpr const char* kSummary = "summary.md";
inline constexpr const char* kEffectiveConfig = "effective_config.json";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace files

/// Label used for the container+bulk+tanker aggregate in cost_summary.csv.
inline constexpr std::string_view kMainTypesLabel = "ContainerBulkTanker";

namespace pipeline_detail {

inline std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw PipelineError(PipelineErrorKind::MissingInput, "cannot read " + p.string());
  return in;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw PipelineError(PipelineErrorKind::MissingInput, "cannot write " + p.string());
  return out;
}

inline std::vector<csv::Row> read_table(const fs::path& p, const std::vector<std::string>& header) {
  auto in = open_in(p);
  try {
    return csv::read(in, header);
  } catch (const csv::CsvError& e) {
    throw PipelineError(PipelineErrorKind::Malformed, p.filename().string() + ": " + e.what());
  }
}

inline double field_double(const csv::Row& row, std::size_t k, const fs::path& p) {
  const auto v = csv::parse_double(row[k]);
  if (!v) {
    throw PipelineError(PipelineErrorKind::Malformed,
                        fmt::format("{} line {}: bad number '{}'", p.filename().string(),
                                    row.line, row[k]));
  }
  return *v;
}

inline Scenario field_scenario(const csv::Row& row, std::size_t k, const fs::path& p) {
  const auto s = parse_scenario(row[k]);
  if (!s) {
    throw PipelineError(PipelineErrorKind::Malformed,
                        fmt::format("{} line {}: unknown scenario '{}'", p.filename().string(),
                                    row.line, row[k]));
  }
  return *s;
}

inline VesselType field_type(const csv::Row& row, std::size_t k, const fs::path& p) {
  const auto t = parse_vessel_type(row[k]);
  if (!t) {
    throw PipelineError(PipelineErrorKind::Malformed,
                        fmt::format("{} line {}: unknown vessel type '{}'",
                                    p.filename().string(), row.line, row[k]));
  }
  return *t;
}

struct Inputs {
  VesselRegistry vessels;
  PortRegistry ports;
};

inline Inputs load_inputs(const ScenarioConfig& cfg) {
  Inputs in;
  {
    auto f = open_in(cfg.data.vessels);
    in.vessels = load_vessels(f);
  }
  auto f = open_in(cfg.data.ports);
  in.ports = load_ports(f, cfg.countries);
  return in;
}

/// International voyages from the ingest stage that depart in the run year.
inline std::vector<VoyageRecord> load_year_voyages(const ScenarioConfig& cfg, const Inputs& in,
                                                   const fs::path& out) {
  auto f = open_in(out / files::kVoyages);
  auto set = load_movements(f, in.vessels, in.ports);
  std::vector<VoyageRecord> year;
  for (auto& v : set.voyages) {
    if (calendar_year(v.depart_time) == cfg.year) year.push_back(std::move(v));
  }
  return year;
}

inline std::function<std::string(const std::string&)> region_fn(const ScenarioConfig& cfg) {
  return [&cfg](const std::string& c) { return cfg.economy.region_of(c); };
}

inline cge::Economy load_economy(const ScenarioConfig& cfg) {
  cge::Economy e;
  e.config = cfg.economy;
  {
    auto f = open_in(cfg.data.sam);
    e.sam = cge::read_sam(f);
  }
  auto f = open_in(cfg.data.margins);
  e.margins = cge::read_margins(f);
  return e;
}

inline std::string fmt2(double v) { return fmt::format("{:.2f}", v); }

}  // namespace pipeline_detail

/// Midpoint parameters with p_stricter resolved against the port registry.
/// Ranges whose bounds stray from the midpoint get a warning on `warn`.
inline BwtsCostParams resolve_cost_params(const ScenarioConfig& cfg, const PortRegistry& ports,
                                          std::ostream* warn = nullptr) {
  const CostRanges& r = cfg.costs;
  auto mid = [&](const char* name, const CostRange& range) {
    const Midpoint m = midpoint_param(range.low, range.high);
    if (!m.within_bounds && warn) {
      *warn << fmt::format("warning: cost range {} [{}, {}] is wide relative to its midpoint\n",
                           name, csv::num(range.low), csv::num(range.high));
    }
    return m.value;
  };
  BwtsCostParams p;
  p.c_v_imo_pv = mid("c_v_imo_pv", r.c_v_imo_pv);
  p.o_v_imo = mid("o_v_imo", r.o_v_imo);
  p.t_imo = mid("t_imo", r.t_imo);
  p.c_barge_pv = mid("c_barge_pv", r.c_barge_pv);
  p.c_p_us_pv = mid("c_p_us_pv", r.c_p_us_pv);
  p.o_p_us = mid("o_p_us", r.o_p_us);
  p.t_us = mid("t_us", r.t_us);
  p.t_tug = mid("t_tug", r.t_tug);
  if (r.p_stricter) {
    p.p_stricter = *r.p_stricter;
  } else {
    for (const auto& port : ports) {
      if (cfg.stricter_region.count(port.country)) p.p_stricter += 1.0;
    }
  }
  p.lifetime_years = r.lifetime_years;
  p.discount_rate = r.discount_rate;
  p.inflation_rate = r.inflation_rate;
  return p;
}

inline CostOptions cost_options(const ScenarioConfig& cfg) {
  return CostOptions{cfg.tug_scales_with_probability, cfg.discharge.discharge_probability};
}

// ---------------------------------------------------------------------------
// Stages

inline const std::vector<std::string>& history_csv_header() {
  static const std::vector<std::string> h = {"vessel_id", "annual_voyages",
                                             "annual_voyages_non_stricter", "ever_calls_stricter"};
  return h;
}

inline void stage_ingest(const ScenarioConfig& cfg, const fs::path& out) {
  using namespace pipeline_detail;
  const Inputs in = load_inputs(cfg);
  auto f = open_in(cfg.data.movements);
  const VoyageSet set = load_movements(f, in.vessels, in.ports);
  {
    auto o = open_out(out / files::kVoyages);
    write_movements(o, set.voyages);
  }
  {
    auto o = open_out(out / files::kHistories);
    csv::Writer w(o);
    w.row(history_csv_header());
    for (const auto& [id, h] : build_history(set.voyages, cfg.stricter_region, cfg.year)) {
      w.row(id, h.annual_voyages, h.annual_voyages_non_stricter, h.ever_calls_stricter ? 1 : 0);
    }
  }
  auto o = open_out(out / files::kIngestStats);
  csv::Writer w(o);
  w.row("metric", "value");
  w.row("vessels", static_cast<long long>(std::distance(in.vessels.begin(), in.vessels.end())));
  w.row("ports", static_cast<long long>(std::distance(in.ports.begin(), in.ports.end())));
  w.row("international_voyages", static_cast<long long>(set.voyages.size()));
  w.row("dropped_domestic", static_cast<long long>(set.dropped_domestic));
}

inline std::map<std::string, VesselHistory> read_histories(const fs::path& p) {
  using namespace pipeline_detail;
  std::map<std::string, VesselHistory> out;
  for (const auto& row : read_table(p, history_csv_header())) {
    const auto n = csv::parse_int(row[1]);
    const auto other = csv::parse_int(row[2]);
    const auto ever = csv::parse_int(row[3]);
    if (!n || !other || !ever) {
      throw PipelineError(PipelineErrorKind::Malformed,
                          fmt::format("histories line {}: bad field", row.line));
    }
    out[row[0]] = VesselHistory{row[0], static_cast<int>(*n), static_cast<int>(*other), *ever != 0};
  }
  return out;
}

inline const std::vector<std::string>& voyage_cost_csv_header() {
  static const std::vector<std::string> h = {"voyage_id", "scenario", "equation",
                                             "compliance_cost_usd"};
  return h;
}

inline const std::vector<std::string>& baseline_cost_csv_header() {
  static const std::vector<std::string> h = {"voyage_id",    "vessel_type",   "origin_country",
                                             "dest_country", "duration_days", "baseline_cost_usd"};
  return h;
}

inline void stage_costs(const ScenarioConfig& cfg, const fs::path& out,
                        std::ostream* warn = &std::cerr) {
  using namespace pipeline_detail;
  const Inputs in = load_inputs(cfg);
  const auto voyages = load_year_voyages(cfg, in, out);
  const auto histories = read_histories(out / files::kHistories);
  const BwtsCostParams params = resolve_cost_params(cfg, in.ports, warn);
  const FleetCosts fleet = cost_fleet(voyages, in.vessels, histories, cfg.stricter_region, params,
                                      cfg.discharge, cost_options(cfg));
  {
    auto o = open_out(out / files::kVoyageCosts);
    csv::Writer w(o);
    w.row(voyage_cost_csv_header());
    for (const Scenario s : cfg.scenarios) {
      for (const auto& c : fleet.costs(s)) {
        w.row(c.voyage_id, to_string(s), to_string(c.equation), c.compliance_cost);
      }
    }
  }
  DailyCostTable table = [&] {
    auto f = open_in(cfg.data.daily_costs);
    return load_daily_costs(f);
  }();
  {
    auto o = open_out(out / files::kBaselineCosts);
    csv::Writer w(o);
    w.row(baseline_cost_csv_header());
    for (const auto& v : voyages) {
      const auto& vessel = in.vessels.at(v.vessel_id);
      w.row(v.voyage_id, to_string(vessel.vessel_type), v.origin_country, v.dest_country,
            v.duration_days, voyage_baseline_cost(v, vessel, table));
    }
  }
  const AnnualizedCosts annual = annualize_params(params);
  auto o = open_out(out / files::kCostParams);
  csv::Writer w(o);
  w.row("parameter", "value");
  w.row("c_v_imo_pv", params.c_v_imo_pv);
  w.row("o_v_imo", params.o_v_imo);
  w.row("t_imo", params.t_imo);
  w.row("c_barge_pv", params.c_barge_pv);
  w.row("c_p_us_pv", params.c_p_us_pv);
  w.row("o_p_us", params.o_p_us);
  w.row("t_us", params.t_us);
  w.row("t_tug", params.t_tug);
  w.row("p_stricter", params.p_stricter);
  w.row("annual_vessel_bwts", annual.vessel_bwts());
  w.row("annual_barge_system", annual.barge_system());
  w.row("stricter_volume_total", fleet.stricter_volume_total);
}

/// Per-voyage cost lines rebuilt from the costs stage outputs.
inline std::vector<VoyageCostLine> read_cost_lines(const fs::path& out) {
  using namespace pipeline_detail;
  const fs::path bp = out / files::kBaselineCosts;
  const fs::path cp = out / files::kVoyageCosts;
  std::vector<VoyageCostLine> lines;
  std::map<std::string, std::size_t> index;
  for (const auto& row : read_table(bp, baseline_cost_csv_header())) {
    index[row[0]] = lines.size();
    lines.push_back({row[2], row[3], field_type(row, 1, bp), field_double(row, 5, bp), {}});
  }
  for (const auto& row : read_table(cp, voyage_cost_csv_header())) {
    const auto it = index.find(row[0]);
    if (it == index.end()) {
      throw PipelineError(PipelineErrorKind::Malformed,
                          fmt::format("voyage_costs line {}: voyage '{}' has no baseline cost",
                                      row.line, row[0]));
    }
    lines[it->second].compliance[static_cast<int>(field_scenario(row, 1, cp))] =
        field_double(row, 3, cp);
  }
  return lines;
}

inline const std::vector<std::string>& cost_cells_csv_header() {
  static const std::vector<std::string> h = {"origin",       "dest",           "vessel_type",
                                             "scenario",     "voyages",        "baseline_usd",
                                             "compliance_usd", "pct_change"};
  return h;
}

inline const std::vector<std::string>& cost_summary_csv_header() {
  static const std::vector<std::string> h = {"vessel_type",    "scenario", "voyages",
                                             "baseline_usd",   "compliance_usd", "pct_change"};
  return h;
}

inline void stage_shocks(const ScenarioConfig& cfg, const fs::path& out) {
  using namespace pipeline_detail;
  const auto lines = read_cost_lines(out);
  const CostShockMatrix countries = aggregate_pairs(lines);
  {
    auto o = open_out(out / files::kCostCells);
    csv::Writer w(o);
    w.row(cost_cells_csv_header());
    for (const Scenario s : cfg.scenarios) {
      for (const auto& [key, c] : countries) {
        w.row(key.origin, key.dest, to_string(key.type), to_string(s),
              static_cast<unsigned long long>(c.voyages), c.baseline_total, c.compliance(s),
              c.pct(s));
      }
    }
  }
  {
    auto o = open_out(out / files::kShockReport);
    o << render_markdown(shock_report(countries, cfg.shock_threshold_pct, cfg.scenarios));
  }
  {
    auto o = open_out(out / files::kShocks);
    write_shocks(o, aggregate_to_regions(countries, region_fn(cfg)), cfg.scenarios);
  }
  // Fleet-wide ratios per vessel type, plus the main three types together.
  std::map<VesselType, CostCell> by_type;
  for (const auto& l : lines) {
    auto& c = by_type[l.type];
    ++c.voyages;
    c.baseline_total += l.baseline;
    c.compliance_total[0] += l.compliance[0];
    c.compliance_total[1] += l.compliance[1];
  }
  CostCell main;
  for (const VesselType t : {VesselType::Container, VesselType::Bulk, VesselType::Tanker}) {
    const auto it = by_type.find(t);
    if (it == by_type.end()) continue;
    main.voyages += it->second.voyages;
    main.baseline_total += it->second.baseline_total;
    main.compliance_total[0] += it->second.compliance_total[0];
    main.compliance_total[1] += it->second.compliance_total[1];
  }
  auto o = open_out(out / files::kCostSummary);
  csv::Writer w(o);
  w.row(cost_summary_csv_header());
  for (const Scenario s : cfg.scenarios) {
    for (const auto& [t, c] : by_type) {
      w.row(to_string(t), to_string(s), static_cast<unsigned long long>(c.voyages),
            c.baseline_total, c.compliance(s), c.pct(s));
    }
    if (main.voyages > 0) {
      w.row(kMainTypesLabel, to_string(s), static_cast<unsigned long long>(main.voyages),
            main.baseline_total, main.compliance(s), main.pct(s));
    }
  }
}

inline const std::vector<std::string>& solver_csv_header() {
  static const std::vector<std::string> h = {"scenario", "iterations", "residual_norm",
                                             "walras_residual"};
  return h;
}

struct SolveOutcome {
  cge::Equilibrium benchmark;
  std::map<Scenario, cge::Equilibrium> counterfactual;
  std::map<Scenario, cge::TradeDeltas> trade;
  std::map<Scenario, std::vector<cge::MacroRow>> macro;
};

/// Solves the benchmark and one counterfactual per configured scenario.
inline SolveOutcome solve_scenarios(const ScenarioConfig& cfg, const cge::CgeModel& m,
                                    const std::map<Scenario, PctTable>& shocks) {
  SolveOutcome r;
  r.benchmark = cge::solve(m, cge::benchmark_margins(m));
  for (const Scenario s : cfg.scenarios) {
    const auto it = shocks.find(s);
    const PctTable empty;
    const auto set = cge::map_shocks(m, it == shocks.end() ? empty : it->second);
    auto& eq = r.counterfactual[s] = cge::solve(m, cge::apply_shocks(m, set));
    r.trade[s] = cge::trade_deltas(m, r.benchmark, eq);
    r.macro[s] = cge::macro_report(m, r.benchmark, eq);
  }
  return r;
}

inline std::string render_trade_report(const ScenarioConfig& cfg, const SolveOutcome& r) {
  using pipeline_detail::fmt2;
  std::string out =
      "# Changes in trade\n\nReal values at benchmark prices; exports FOB, imports CIF. "
      "Percent changes to two decimals, value changes in $ million.\n\n## By region\n\n";
  out += "| Region |";
  for (const Scenario s : cfg.scenarios) {
    out += fmt::format(" {0} exports % | {0} exports $M | {0} imports % | {0} imports $M |",
                       to_string(s));
  }
  out += "\n|---|";
  for (std::size_t k = 0; k < cfg.scenarios.size() * 4; ++k) out += "---:|";
  out += "\n";
  const auto& first = r.trade.at(cfg.scenarios.front());
  for (std::size_t k = 0; k < first.regions.size(); ++k) {
    out += fmt::format("| {} |", first.regions[k].region);
    for (const Scenario s : cfg.scenarios) {
      const auto& g = r.trade.at(s).regions[k];
      out += fmt::format(" {} | {:.0f} | {} | {:.0f} |", fmt2(g.export_pct()), g.export_change(),
                         fmt2(g.import_pct()), g.import_change());
    }
    out += "\n";
  }
  // Routes touching the stricter region's model regions.
  std::set<std::string> stricter;
  for (const auto& c : cfg.stricter_region) stricter.insert(cfg.economy.region_of(c));
  out += "\n## Routes to and from the stricter region\n\n| Route | Sector |";
  for (const Scenario s : cfg.scenarios) out += fmt::format(" {0} % | {0} $M |", to_string(s));
  out += "\n|---|---|";
  for (std::size_t k = 0; k < cfg.scenarios.size() * 2; ++k) out += "---:|";
  out += "\n";
  for (std::size_t k = 0; k < first.routes.size(); ++k) {
    const auto& key = first.routes[k].key;
    if (!stricter.count(key.origin) && !stricter.count(key.dest)) continue;
    out += fmt::format("| {}/{} | {} |", key.origin, key.dest, key.sector);
    for (const Scenario s : cfg.scenarios) {
      const auto& t = r.trade.at(s).routes[k];
      out += fmt::format(" {} | {:.0f} |", fmt2(t.pct()), t.change());
    }
    out += "\n";
  }
  return out;
}

inline std::string render_macro_report(const ScenarioConfig& cfg, const SolveOutcome& r) {
  using pipeline_detail::fmt2;
  std::string out =
      "# Macroeconomic effects\n\nReal GDP and consumer prices in percent; equivalent "
      "variation in $ million.\n\n| Region |";
  for (const Scenario s : cfg.scenarios) {
    out += fmt::format(" {0} GDP % | {0} CPI % | {0} EV $M |", to_string(s));
  }
  out += "\n|---|";
  for (std::size_t k = 0; k < cfg.scenarios.size() * 3; ++k) out += "---:|";
  out += "\n";
  const auto& first = r.macro.at(cfg.scenarios.front());
  for (std::size_t k = 0; k < first.size(); ++k) {
    out += fmt::format("| {} |", first[k].region);
    for (const Scenario s : cfg.scenarios) {
      const auto& row = r.macro.at(s)[k];
      out += fmt::format(" {} | {} | {:.0f} |", fmt2(row.gdp_pct), fmt2(row.cpi_pct), row.ev);
    }
    out += "\n";
  }
  out += "| Total |";
  for (const Scenario s : cfg.scenarios) {
    double ev = 0.0;
    for (const auto& row : r.macro.at(s)) ev += row.ev;
    out += fmt::format(" | | {:.0f} |", ev);
  }
  out += "\n";
  return out;
}

inline void stage_solve(const ScenarioConfig& cfg, const fs::path& out) {
  using namespace pipeline_detail;
  const cge::CgeModel m = cge::calibrate(load_economy(cfg));
  std::map<Scenario, PctTable> shocks;
  {
    auto f = open_in(out / files::kShocks);
    shocks = read_shocks(f);
  }
  const SolveOutcome r = solve_scenarios(cfg, m, shocks);
  {
    auto o = open_out(out / files::kResultsTrade);
    csv::Writer w(o);
    w.row(cge::trade_csv_header());
    for (const Scenario s : cfg.scenarios) cge::write_trade_rows(w, to_string(s), r.trade.at(s));
  }
  {
    auto o = open_out(out / files::kResultsMacro);
    csv::Writer w(o);
    w.row(cge::macro_csv_header());
    for (const Scenario s : cfg.scenarios) cge::write_macro_rows(w, to_string(s), r.macro.at(s));
  }
  {
    auto o = open_out(out / files::kSolver);
    csv::Writer w(o);
    w.row(solver_csv_header());
    w.row("Benchmark", r.benchmark.iterations, r.benchmark.residual_norm,
          r.benchmark.walras_residual);
    for (const Scenario s : cfg.scenarios) {
      const auto& e = r.counterfactual.at(s);
      w.row(to_string(s), e.iterations, e.residual_norm, e.walras_residual);
    }
  }
  {
    auto o = open_out(out / files::kTradeReport);
    o << render_trade_report(cfg, r);
  }
  auto o = open_out(out / files::kMacroReport);
  o << render_macro_report(cfg, r);
}

/// Vessel-type weights for a sector's trade on one route: a single type
/// takes all of it; a container/bulk sector splits by the configured weight,
/// renormalised over the types that sail the route.
inline std::vector<std::pair<VesselType, double>> sector_type_weights(
    const ScenarioConfig& cfg, std::size_t sector, const std::string& origin,
    const std::string& dest, const std::map<CellKey, RouteStats>& stats) {
  const VesselAssignment a = cfg.economy.assignment(sector);
  if (a.carriage == Carriage::None) return {};
  if (a.carriage == Carriage::Single) return {{a.type, 1.0}};
  const double wc = cfg.economy.dual_container_weight;
  std::vector<std::pair<VesselType, double>> w;
  if (wc > 0.0 && stats.count(CellKey{origin, dest, VesselType::Container})) {
    w.push_back({VesselType::Container, wc});
  }
  if (wc < 1.0 && stats.count(CellKey{origin, dest, VesselType::Bulk})) {
    w.push_back({VesselType::Bulk, 1.0 - wc});
  }
  double total = 0.0;
  for (const auto& [t, x] : w) total += x;
  for (auto& [t, x] : w) x /= total;
  return w;
}

inline void stage_traffic(const ScenarioConfig& cfg, const fs::path& out) {
  using namespace pipeline_detail;
  const Inputs in = load_inputs(cfg);
  const auto voyages = load_year_voyages(cfg, in, out);
  auto stats = route_stats(voyages, in.vessels, region_fn(cfg), cfg.alpha_by_type, cfg.alpha);

  // Benchmark FOB values straight from the SAM ($ million -> $).
  const cge::Economy econ = load_economy(cfg);
  const auto& sectors = cfg.economy.sectors;
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    if (cfg.economy.assignment(i).carriage == Carriage::None) continue;
    for (const auto& o : cfg.economy.regions) {
      for (const auto& d : cfg.economy.regions) {
        if (o.id == d.id) continue;
        const double fob =
            econ.sam.at(cge::act_label(o.id, sectors[i].id), cge::arm_label(d.id, sectors[i].id));
        for (const auto& [t, wgt] : sector_type_weights(cfg, i, o.id, d.id, stats)) {
          const auto it = stats.find(CellKey{o.id, d.id, t});
          if (it != stats.end()) it->second.trade_value += fob * wgt * 1e6;
        }
      }
    }
  }

  const fs::path tp = out / files::kResultsTrade;
  std::map<Scenario, std::vector<ValueChange>> changes;
  for (const auto& row : read_table(tp, cge::trade_csv_header())) {
    const std::size_t i = cfg.economy.sector_index(row[2]);
    if (i >= sectors.size()) {
      throw PipelineError(PipelineErrorKind::Malformed,
                          fmt::format("results_trade line {}: unknown sector '{}'", row.line,
                                      row[2]));
    }
    const Scenario s = field_scenario(row, 3, tp);
    const double delta = field_double(row, 5, tp) * 1e6;
    for (const auto& [t, wgt] : sector_type_weights(cfg, i, row[0], row[1], stats)) {
      changes[s].push_back({CellKey{row[0], row[1], t}, delta * wgt});
    }
  }

  std::vector<TrafficDelta> all;
  auto o = open_out(out / files::kTrafficDeltas);
  csv::Writer w(o);
  w.row(traffic_csv_header());
  for (const Scenario s : cfg.scenarios) {
    const auto d = traffic_deltas(stats, changes[s], s);
    write_traffic_rows(w, to_string(s), d);
    all.insert(all.end(), d.begin(), d.end());
  }
  auto r = open_out(out / files::kTrafficReport);
  r << render_markdown(traffic_report(all, cfg.traffic_min_voyages, cfg.scenarios));
}

inline void stage_report(const ScenarioConfig& cfg, const fs::path& out) {
  using namespace pipeline_detail;
  std::string md = fmt::format("# Run summary: {}\n\nYear {}; stricter region: {}.\n\n", cfg.name,
                               cfg.year, fmt::join(cfg.stricter_region, ", "));

  md += "## Compliance cost relative to baseline shipping cost\n\n| Vessel type |";
  for (const Scenario s : cfg.scenarios) md += fmt::format(" {} % |", to_string(s));
  md += "\n|---|";
  for (std::size_t k = 0; k < cfg.scenarios.size(); ++k) md += "---:|";
  md += "\n";
  const fs::path cp = out / files::kCostSummary;
  std::map<std::string, std::map<Scenario, double>> pct;
  std::vector<std::string> order;
  for (const auto& row : read_table(cp, cost_summary_csv_header())) {
    if (!pct.count(row[0])) order.push_back(row[0]);
    pct[row[0]][field_scenario(row, 1, cp)] = field_double(row, 5, cp);
  }
  for (const auto& t : order) {
    md += fmt::format("| {} |", t);
    for (const Scenario s : cfg.scenarios) md += fmt::format(" {} |", fmt2(pct[t][s]));
    md += "\n";
  }

  md += "\n## Welfare\n\n| Scenario | Total EV $M | Stricter-region EV $M |\n|---|---:|---:|\n";
  std::set<std::string> stricter;
  for (const auto& c : cfg.stricter_region) stricter.insert(cfg.economy.region_of(c));
  const fs::path mp = out / files::kResultsMacro;
  std::map<Scenario, std::pair<double, double>> ev;
  for (const auto& row : read_table(mp, cge::macro_csv_header())) {
    auto& e = ev[field_scenario(row, 1, mp)];
    const double v = field_double(row, 4, mp);
    e.first += v;
    if (stricter.count(row[0])) e.second += v;
  }
  for (const Scenario s : cfg.scenarios) {
    md += fmt::format("| {} | {:.0f} | {:.0f} |\n", to_string(s), ev[s].first, ev[s].second);
  }

  md += "\n## Shipping traffic\n\n| Scenario | Voyages added | Voyages removed |\n|---|---:|---:|\n";
  const fs::path dp = out / files::kTrafficDeltas;
  std::map<Scenario, std::pair<long long, long long>> moves;
  for (const auto& row : read_table(dp, traffic_csv_header())) {
    const auto d = csv::parse_int(row[5]);
    if (!d) throw PipelineError(PipelineErrorKind::Malformed, "traffic_deltas: bad delta");
    auto& m = moves[field_scenario(row, 3, dp)];
    (*d > 0 ? m.first : m.second) += std::llabs(*d);
  }
  for (const Scenario s : cfg.scenarios) {
    md += fmt::format("| {} | {} | {} |\n", to_string(s), moves[s].first, moves[s].second);
  }
  auto o = open_out(out / files::kSummary);
  o << md;
}

// ---------------------------------------------------------------------------
// Whole runs

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

inline const std::vector<std::pair<std::string, void (*)(const ScenarioConfig&, const fs::path&)>>&
stage_table() {
  static const std::vector<std::pair<std::string, void (*)(const ScenarioConfig&, const fs::path&)>>
      t = {
          {"ingest", stage_ingest},
          {"costs", [](const ScenarioConfig& c, const fs::path& o) { stage_costs(c, o); }},
          {"shocks", stage_shocks},
          {"solve", stage_solve},
          {"traffic", stage_traffic},
          {"report", stage_report},
      };
  return t;
}

/// Runs one named stage, wrapping its errors with the stage name.
inline double run_stage(const std::string& name, const ScenarioConfig& cfg, const fs::path& out) {
  for (const auto& [stage, fn] : stage_table()) {
    if (stage != name) continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn(cfg, out);
    } catch (const Error& e) {
      throw StageError(stage, e);
    }
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  throw PipelineError(PipelineErrorKind::Malformed, "unknown stage " + name);
}

/// Fingerprint of the configured data files, in a fixed order.
inline std::string world_hash(const ScenarioConfig& cfg) {
  Fnv1a h;
  for (const auto* p : {&cfg.data.vessels, &cfg.data.ports, &cfg.data.movements,
                        &cfg.data.daily_costs, &cfg.data.sam, &cfg.data.margins}) {
    h.update(p->filename().string()).update("\n").update(read_file(*p)).update("\n");
  }
  return h.hex();
}

/// The config as run, with data paths reduced to file names so the text does
/// not depend on where the bundle lives.
inline std::string effective_config_json(ScenarioConfig cfg) {
  for (auto* p : {&cfg.data.vessels, &cfg.data.ports, &cfg.data.movements, &cfg.data.daily_costs,
                  &cfg.data.sam, &cfg.data.margins}) {
    *p = p->filename();
  }
  return config_to_json(cfg);
}

inline std::string config_hash(const ScenarioConfig& cfg) {
  return Fnv1a{}.update(effective_config_json(cfg)).hex();
}

struct RunResult {
  fs::path bundle;
  std::string config_hash;
  std::string world_hash;
  std::vector<StageTiming> timings;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // generate the world from this seed
};

/// Resolves the config text into a runnable config. When a seed is given
/// (or the config has a "world" section), a world is generated into
/// `world_dir` and the user's keys override the generated config.
inline ScenarioConfig resolve_run_config(const fs::path& config_file, const fs::path& world_dir,
                                         const RunOptions& opts) {
  using nlohmann::json;
  const std::string text = read_file(config_file);
  json user;
  try {
    user = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(ConfigErrorKind::Invalid, std::string("config: ") + e.what());
  }
  if (!opts.seed && !user.contains("world")) return parse_config(text, config_file.parent_path());

  std::string scale_name = "desk";
  std::optional<std::uint64_t> seed = opts.seed;
  try {
    if (user.contains("world")) {
      const json& w = user.at("world");
      if (w.contains("scale")) scale_name = w.at("scale").get<std::string>();
      if (!seed && w.contains("seed")) seed = w.at("seed").get<std::uint64_t>();
    }
    if (!seed && user.contains("seed")) seed = user.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(ConfigErrorKind::Invalid, std::string("config: world: ") + e.what());
  }
  const auto scale = parse_scale(scale_name);
  if (!scale) throw ConfigError(ConfigErrorKind::Invalid, "config: unknown world scale " + scale_name);
  if (!seed) throw ConfigError(ConfigErrorKind::Invalid, "config: world needs a seed");
  const World world = generate_world(*seed, *scale);
  write_world(world, world_dir);
  json merged = json::parse(config_to_json(world.config));
  user.erase("world");
  user.erase("seed");
  merged.merge_patch(user);
  merged["seed"] = *seed;
  return parse_config(merged.dump(), world_dir);
}

/// Runs every stage into a staging directory next to `out`, then moves it
/// into place. On failure the staging directory is removed and the error
/// names the stage. An existing `out` is replaced only if it is a bundle.
inline RunResult run_pipeline(const fs::path& config_file, const fs::path& out,
                              const RunOptions& opts = {}) {
  if (fs::exists(out) && !fs::is_empty(out) && !fs::exists(out / files::kManifest)) {
    throw PipelineError(PipelineErrorKind::OutputExists,
                        fmt::format("{} exists and is not a run bundle", out.string()));
  }
  fs::path staging = out;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);
  RunResult result;
  try {
    ScenarioConfig cfg;
    try {
      cfg = resolve_run_config(config_file, staging / "world", opts);
    } catch (const Error& e) {
      throw StageError("config", e);
    }
    result.config_hash = config_hash(cfg);
    result.world_hash = world_hash(cfg);
    {
      auto o = pipeline_detail::open_out(staging / files::kEffectiveConfig);
      o << effective_config_json(cfg) << '\n';
    }
    for (const auto& [stage, fn] : stage_table()) {
      result.timings.push_back({stage, run_stage(stage, cfg, staging)});
    }
    nlohmann::ordered_json m;
    m["config_hash"] = result.config_hash;
    m["world_hash"] = result.world_hash;
    m["seed"] = cfg.seed ? nlohmann::ordered_json(*cfg.seed) : nlohmann::ordered_json(nullptr);
    std::vector<std::string> scen;
    for (const Scenario s : cfg.scenarios) scen.emplace_back(to_string(s));
    m["scenarios"] = scen;
    m["versions"] = {{"bwi", kVersion},
                     {"config_schema", kConfigSchemaVersion},
                     {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                                           EIGEN_MINOR_VERSION)}};
    nlohmann::ordered_json timings;
    double total = 0.0;
    for (const auto& t : result.timings) {
      timings[t.stage] = t.seconds;
      total += t.seconds;
    }
    m["stage_seconds"] = timings;
    m["wall_seconds"] = total;
    auto o = pipeline_detail::open_out(staging / files::kManifest);
    o << m.dump() << '\n';
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  fs::remove_all(out);
  fs::rename(staging, out);
  result.bundle = out;
  return result;
}

// ---------------------------------------------------------------------------
// Bundle comparison

struct DiffEntry {
  std::string file;
  std::string key;     // key columns joined with '/'
  std::string column;
  std::string a, b;    // empty when the row is missing on that side
};

struct BundleDiff {
  bool scenario_ignored = false;
  std::vector<DiffEntry> entries;
  bool empty() const { return entries.empty(); }
};

struct CompareSpec {
  const char* file;
  std::size_t key_columns;       // leading columns forming the row key
  std::optional<std::size_t> scenario_column;
};

inline const std::vector<CompareSpec>& compared_files() {
  static const std::vector<CompareSpec> f = {
      {files::kCostCells, 4, 3},     {files::kCostSummary, 2, 1},
      {files::kShocks, 4, 3},        {files::kResultsTrade, 4, 3},
      {files::kResultsMacro, 2, 1},  {files::kTrafficDeltas, 4, 3},
  };
  return f;
}

inline nlohmann::json read_manifest(const fs::path& dir) {
  try {
    return nlohmann::json::parse(read_file(dir / files::kManifest));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError(PipelineErrorKind::Malformed,
                        fmt::format("{}: bad manifest: {}", dir.string(), e.what()));
  }
}

/// Row-keyed differences between two bundles of the same world. When each
/// bundle holds a single scenario, the scenario column is left out of the
/// key so the two runs line up row for row.
inline BundleDiff compare_bundles(const fs::path& a, const fs::path& b) {
  const auto ma = read_manifest(a);
  const auto mb = read_manifest(b);
  if (ma.at("world_hash") != mb.at("world_hash")) {
    throw PipelineError(PipelineErrorKind::WorldMismatch,
                        fmt::format("bundles come from different worlds ({} vs {})",
                                    ma.at("world_hash").get<std::string>(),
                                    mb.at("world_hash").get<std::string>()));
  }
  BundleDiff diff;
  diff.scenario_ignored = ma.at("scenarios").size() == 1 && mb.at("scenarios").size() == 1;
  for (const auto& cf : compared_files()) {
    auto load = [&](const fs::path& dir) {
      std::ifstream in(dir / cf.file, std::ios::binary);
      std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> rows;
      std::string line;
      std::vector<std::string> header;
      while (std::getline(in, line)) {
        auto fields = csv::split(line);
        if (header.empty()) {
          header = fields;
          continue;
        }
        std::vector<std::string> key;
        for (std::size_t k = 0; k < cf.key_columns && k < fields.size(); ++k) {
          if (diff.scenario_ignored && cf.scenario_column == k) continue;
          key.push_back(fields[k]);
        }
        std::vector<std::string> values(fields.begin() + static_cast<long>(std::min(
                                                              cf.key_columns, fields.size())),
                                        fields.end());
        rows[fmt::format("{}", fmt::join(key, "/"))] = {header, values};
      }
      return rows;
    };
    const auto ra = load(a);
    const auto rb = load(b);
    std::set<std::string> keys;
    for (const auto& [k, v] : ra) keys.insert(k);
    for (const auto& [k, v] : rb) keys.insert(k);
    for (const auto& k : keys) {
      const auto ia = ra.find(k);
      const auto ib = rb.find(k);
      if (ia == ra.end() || ib == rb.end()) {
        diff.entries.push_back({cf.file, k, "(row)", ia == ra.end() ? "" : "present",
                                ib == rb.end() ? "" : "present"});
        continue;
      }
      const auto& header = ia->second.first;
      const auto& va = ia->second.second;
      const auto& vb = ib->second.second;
      for (std::size_t c = 0; c < std::max(va.size(), vb.size()); ++c) {
        const std::string x = c < va.size() ? va[c] : "";
        const std::string y = c < vb.size() ? vb[c] : "";
        if (x == y) continue;
        const std::size_t col = cf.key_columns + c;
        diff.entries.push_back(
            {cf.file, k, col < header.size() ? header[col] : std::to_string(col), x, y});
      }
    }
  }
  return diff;
}

inline std::string render_markdown(const BundleDiff& d) {
  if (d.empty()) return "No differences.\n";
  std::string out = "| File | Row | Column | A | B | B - A |\n|---|---|---|---:|---:|---:|\n";
  for (const auto& e : d.entries) {
    std::string delta;
    const auto x = csv::parse_double(e.a);
    const auto y = csv::parse_double(e.b);
    if (x && y) delta = csv::num(*y - *x);
    out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", e.file, e.key, e.column, e.a, e.b,
                       delta);
  }
  return out;
}

}  // namespace bwi
