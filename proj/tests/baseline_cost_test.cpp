#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bwi/baseline_cost.hpp"
#include "support.hpp"

namespace bwi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DailyCostTable two_bucket_table() {
  return DailyCostTable({{VesselType::Bulk, 50000, kInf, 10, 20, 30, 40},
                         {VesselType::Bulk, 0, 50000, 1, 2, 3, 4}});
}

BaselineErrorKind baseline_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BaselineError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no BaselineError thrown";
  return BaselineErrorKind::MalformedRow;
}

TEST(DailyCosts, BucketEdgesAreExclusiveBelowInclusiveAbove) {
  const auto t = two_bucket_table();
  EXPECT_DOUBLE_EQ(t.lookup(VesselType::Bulk, 50000.0).total(), 10.0);
  EXPECT_DOUBLE_EQ(t.lookup(VesselType::Bulk, 50000.5).total(), 100.0);
  EXPECT_DOUBLE_EQ(t.lookup(VesselType::Bulk, std::nullopt).total(), 100.0);
}

TEST(DailyCosts, MissingTypeOrZeroDwtHasNoBucket) {
  const auto t = two_bucket_table();
  EXPECT_EQ(baseline_error([&] { t.lookup(VesselType::Tanker, 1.0); }),
            BaselineErrorKind::MissingBucket);
  EXPECT_EQ(baseline_error([&] { t.lookup(VesselType::Bulk, 0.0); }),
            BaselineErrorKind::MissingBucket);
}

TEST(DailyCosts, RejectsGapsAndOpenEnds) {
  EXPECT_EQ(baseline_error([] {
              DailyCostTable({{VesselType::Bulk, 0, 10, 1, 1, 1, 1},
                              {VesselType::Bulk, 20, kInf, 1, 1, 1, 1}});
            }),
            BaselineErrorKind::InvalidTable);
  EXPECT_EQ(baseline_error([] { DailyCostTable({{VesselType::Bulk, 5, kInf, 1, 1, 1, 1}}); }),
            BaselineErrorKind::InvalidTable);
  EXPECT_EQ(baseline_error([] { DailyCostTable({{VesselType::Bulk, 0, 9, 1, 1, 1, 1}}); }),
            BaselineErrorKind::InvalidTable);
  EXPECT_EQ(baseline_error([] { DailyCostTable({{VesselType::Bulk, 0, kInf, -1, 1, 1, 1}}); }),
            BaselineErrorKind::InvalidTable);
}

TEST(DailyCosts, CsvRoundTrip) {
  const auto t = synthetic_daily_cost_table();
  std::ostringstream out;
  write_daily_costs(out, t);
  std::istringstream in(out.str());
  const auto back = load_daily_costs(in);
  ASSERT_EQ(back.rows().size(), t.rows().size());
  for (std::size_t k = 0; k < t.rows().size(); ++k) {
    EXPECT_EQ(back.rows()[k].total(), t.rows()[k].total());
  }
}

TEST(DailyCosts, SyntheticTableGrowsWithDwt) {
  const auto t = synthetic_daily_cost_table();
  for (const auto type : {VesselType::Container, VesselType::Bulk, VesselType::Tanker}) {
    const auto b = t.buckets(type);
    ASSERT_EQ(b.size(), 5u);
    for (std::size_t k = 1; k < b.size(); ++k) EXPECT_GT(b[k].total(), b[k - 1].total());
  }
}

TEST(BaselineCost, DailyTotalTimesDuration) {
  const auto t = two_bucket_table();
  const auto v = test::voyage("M", "V", "CHN", "USA", "2011-01-01T00:00:00Z", 12.5);
  EXPECT_DOUBLE_EQ(voyage_baseline_cost(v, {"V", VesselType::Bulk, 80000.0, 0}, t), 1250.0);
  EXPECT_DOUBLE_EQ(voyage_baseline_cost(v, {"V", VesselType::Bulk, 1000.0, 0}, t), 125.0);
}

std::vector<VoyageCostLine> random_lines(Rng& rng, int n) {
  const std::vector<std::string> c = {"USA", "CHN", "JPN", "CAN"};
  std::vector<VoyageCostLine> out;
  for (int k = 0; k < n; ++k) {
    VoyageCostLine l;
    l.origin = c[rng.integer(0, 3)];
    l.dest = c[rng.integer(0, 3)];
    l.type = kAllVesselTypes[rng.integer(0, 2)];
    l.baseline = rng.uniform(1e4, 1e6);
    l.compliance = {rng.uniform(0, 1e4), rng.uniform(0, 2e4)};
    out.push_back(l);
  }
  return out;
}

TEST(ShockMatrix, CellSumsPreserveTotalsProperty) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto lines = random_lines(rng, static_cast<int>(rng.integer(1, 300)));
    const auto m = aggregate_pairs(lines);
    double base = 0, c0 = 0, c1 = 0, mb = 0, m0 = 0, m1 = 0;
    std::size_t count = 0;
    for (const auto& l : lines) {
      base += l.baseline;
      c0 += l.compliance[0];
      c1 += l.compliance[1];
    }
    for (const auto& [k, cell] : m) {
      count += cell.voyages;
      mb += cell.baseline_total;
      m0 += cell.compliance_total[0];
      m1 += cell.compliance_total[1];
    }
    EXPECT_EQ(count, lines.size());
    EXPECT_NEAR(mb, base, 1e-9 * base);
    EXPECT_NEAR(m0, c0, 1e-9 * c0 + 1e-9);
    EXPECT_NEAR(m1, c1, 1e-9 * c1 + 1e-9);
  }
}

TEST(ShockMatrix, RegionAggregationDropsInternalFlows) {
  std::vector<VoyageCostLine> lines = {
      {"USA", "CAN", VesselType::Bulk, 100, {1, 2}},
      {"CHN", "USA", VesselType::Bulk, 200, {3, 4}},
      {"CHN", "CAN", VesselType::Bulk, 300, {5, 6}},
  };
  const auto regions = aggregate_to_regions(aggregate_pairs(lines), [](const std::string& c) {
    return c == "CAN" ? std::string("USA") : c;
  });
  ASSERT_EQ(regions.size(), 1u);
  const auto& cell = regions.at(CellKey{"CHN", "USA", VesselType::Bulk});
  EXPECT_EQ(cell.voyages, 2u);
  EXPECT_DOUBLE_EQ(cell.baseline_total, 500.0);
  EXPECT_DOUBLE_EQ(cell.pct(Scenario::StricterRegional), 2.0);
}

TEST(ShockMatrix, ShocksCsvRoundTrip) {
  Rng rng(32);
  const auto m = aggregate_pairs(random_lines(rng, 100));
  std::ostringstream out;
  write_shocks(out, m, kAllScenarios);
  std::istringstream in(out.str());
  const auto back = read_shocks(in);
  for (const Scenario s : kAllScenarios) EXPECT_EQ(back.at(s), pct_table(m, s));
}

CostShockMatrix report_fixture() {
  CostShockMatrix m;
  auto cell = [&](const char* o, const char* d, VesselType t, double base, double c0, double c1) {
    m[CellKey{o, d, t}] = CostCell{1, base, {c0, c1}};
  };
  cell("CHN", "USA", VesselType::Bulk, 1000, 99.9, 125);     // 9.99%, 12.5%
  cell("JPN", "USA", VesselType::Tanker, 100000, 10000, 4);  // 10% exactly
  cell("DEU", "USA", VesselType::Container, 100000, 9999, 9999.9);
  cell("DEU", "USA", VesselType::Bulk, 1e6, 4000, 1499);  // 0.4% and 0.1499%
  return m;
}

TEST(ShockReport, ThresholdIsInclusive) {
  const auto r = shock_report(report_fixture(), 10.0);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].origin, "CHN");
  EXPECT_EQ(r.rows[1].origin, "JPN");
  const auto only_consistent = shock_report(report_fixture(), 10.0, {&kAllScenarios[0], 1});
  ASSERT_EQ(only_consistent.rows.size(), 1u);
  EXPECT_EQ(only_consistent.rows[0].origin, "JPN");
}

TEST(ShockReport, DisplayRounding) {
  EXPECT_EQ(display_pct(0.4), 1);
  EXPECT_EQ(display_pct(0.0), 0);
  EXPECT_EQ(display_pct(12.5), 13);
  EXPECT_EQ(display_pct(9.99), 10);
  EXPECT_EQ(display_pct(-0.4), 0);
  const auto r = shock_report(report_fixture(), 0.0);
  ASSERT_EQ(r.rows.size(), 3u);
  const auto& deu = r.rows[1];
  ASSERT_EQ(deu.origin, "DEU");
  const auto& bulk = deu.cells.at(VesselType::Bulk);
  EXPECT_EQ(bulk[0].pct, 1);
  EXPECT_EQ(bulk[0].kusd, 4);
  EXPECT_EQ(bulk[1].kusd, 1);
}

TEST(ShockReport, MarkdownMarksMissingTypes) {
  const auto md = render_markdown(shock_report(report_fixture(), 10.0));
  EXPECT_NE(md.find("| CHN/USA | - | - | - | - |"), std::string::npos) << md;
  EXPECT_NE(md.find("| 10 | 0 | 13 | 0 |"), std::string::npos) << md;
  EXPECT_THROW(shock_report(report_fixture(), -1.0), BaselineError);
}

}  // namespace
}  // namespace bwi
