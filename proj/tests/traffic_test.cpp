#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bwi/traffic_model.hpp"
#include "support.hpp"

namespace bwi {
namespace {

RouteStats stats(double value, double voyages, double avg_dwt, double alpha) {
  RouteStats s;
  s.route = CellKey{"CHN", "USA", VesselType::Container};
  s.trade_value = value;
  s.voyages = voyages;
  s.avg_dwt = avg_dwt;
  s.allocated_dwt = voyages * avg_dwt;
  s.alpha = alpha;
  return s;
}

TEST(Traffic, FractionalVoyagesTrackTradeChangeProperty) {
  Rng rng(51);
  for (int k = 0; k < 2000; ++k) {
    const auto s = stats(rng.uniform(1e6, 1e11), static_cast<double>(rng.integer(1, 5000)),
                         rng.uniform(5e3, 2e5), rng.uniform(0.05, 1.0));
    const double dv = s.trade_value * rng.uniform(-0.5, 0.5);
    const double ratio = value_weight_ratio(s);
    const double frac = fractional_voyages(dwt_delta(dv, ratio, s.alpha), s.avg_dwt);
    EXPECT_NEAR(frac / s.voyages, dv / s.trade_value, 1e-12);
  }
}

TEST(Traffic, OneVesselLoadIsOneVoyage) {
  Rng rng(52);
  for (int k = 0; k < 2000; ++k) {
    const auto s = stats(rng.uniform(1e6, 1e11), static_cast<double>(rng.integer(1, 5000)),
                         rng.uniform(5e3, 2e5), rng.uniform(0.05, 1.0));
    const double load = s.trade_value * s.avg_dwt / s.allocated_dwt;
    const double ratio = value_weight_ratio(s);
    EXPECT_EQ(voyage_delta(dwt_delta(load, ratio, s.alpha), s.avg_dwt), 1);
    EXPECT_EQ(voyage_delta(dwt_delta(-load, ratio, s.alpha), s.avg_dwt), -1);
    EXPECT_EQ(voyage_delta(dwt_delta(0.999 * load, ratio, s.alpha), s.avg_dwt), 0);
  }
}

TEST(Traffic, RoundsTowardZero) {
  EXPECT_EQ(whole_voyages(2.7), 2);
  EXPECT_EQ(whole_voyages(-2.7), -2);
  EXPECT_EQ(whole_voyages(0.9999999999999999), 1);
  EXPECT_EQ(whole_voyages(-0.4), 0);
}

TEST(Traffic, ZeroDwtRouteIsAnError) {
  try {
    value_weight_ratio(stats(1e6, 0, 0, 0.6));
    FAIL();
  } catch (const TrafficError& e) {
    EXPECT_EQ(e.kind(), TrafficErrorKind::ZeroDwt);
  }
}

TEST(Traffic, RouteStatsAverageKnownDwtOnly) {
  VesselRegistry vessels;
  vessels.insert({"A", VesselType::Bulk, 40000.0, 0}, "A");
  vessels.insert({"B", VesselType::Bulk, 60000.0, 0}, "B");
  vessels.insert({"C", VesselType::Bulk, std::nullopt, 0}, "C");
  vessels.insert({"D", VesselType::Tanker, std::nullopt, 0}, "D");
  const std::vector<VoyageRecord> vs = {
      test::voyage("1", "A", "CHN", "USA"), test::voyage("2", "B", "CHN", "USA"),
      test::voyage("3", "C", "CHN", "USA"), test::voyage("4", "D", "CHN", "USA"),
      test::voyage("5", "A", "CHN", "HKG"),
  };
  const auto st = route_stats(vs, vessels,
                              [](const std::string& c) { return c == "HKG" ? "CHN" : c; },
                              {{VesselType::Bulk, 0.8}});
  ASSERT_EQ(st.size(), 1u);
  const auto& s = st.at(CellKey{"CHN", "USA", VesselType::Bulk});
  EXPECT_EQ(s.voyages, 3.0);
  EXPECT_EQ(s.avg_dwt, 50000.0);
  EXPECT_EQ(s.allocated_dwt, 150000.0);
  EXPECT_EQ(s.alpha, 0.8);
}

TEST(Traffic, DeltasSumFractionsBeforeRounding) {
  std::map<CellKey, RouteStats> st;
  auto s = stats(1000.0, 10, 100.0, 0.5);
  st[s.route] = s;
  // Each change is 0.6 of a vessel-load; together they move one voyage.
  const std::vector<ValueChange> changes = {{s.route, 60.0}, {s.route, 60.0},
                                            {CellKey{"X", "Y", VesselType::Bulk}, 1e9}};
  const auto d = traffic_deltas(st, changes, Scenario::StricterRegional);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_NEAR(d[0].fractional, 1.2, 1e-12);
  EXPECT_EQ(d[0].delta_voyages, 1);
  EXPECT_EQ(d[0].current_voyages, 10);
  EXPECT_DOUBLE_EQ(d[0].pct(), 10.0);
}

std::vector<TrafficDelta> report_fixture() {
  auto delta = [](const char* o, VesselType t, Scenario s, long long dv) {
    TrafficDelta d;
    d.route = CellKey{o, "USA", t};
    d.scenario = s;
    d.delta_voyages = dv;
    d.current_voyages = 400;
    return d;
  };
  return {delta("CHN", VesselType::Bulk, Scenario::Consistent, -3),
          delta("CHN", VesselType::Bulk, Scenario::StricterRegional, -10),
          delta("JPN", VesselType::Tanker, Scenario::StricterRegional, -9),
          delta("DEU", VesselType::Container, Scenario::StricterRegional, 12)};
}

TEST(TrafficReport, ThresholdIsInclusiveOnMagnitude) {
  const auto r = traffic_report(report_fixture(), 10);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0].origin, "CHN");
  EXPECT_EQ(r.rows[1].origin, "DEU");
  EXPECT_EQ(*r.rows[0].cells.at(VesselType::Bulk).reduced[1], 10);
  EXPECT_EQ(*r.rows[1].cells.at(VesselType::Container).reduced[1], -12);
  EXPECT_THROW(traffic_report(report_fixture(), -1), TrafficError);
}

TEST(TrafficReport, MarkdownUsesOneDecimal) {
  const auto md = render_markdown(traffic_report(report_fixture(), 10));
  EXPECT_NE(md.find("| 400 | 3 | 0.8 | 10 | 2.5 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| -12 | -3.0 |"), std::string::npos) << md;
  EXPECT_EQ(md.find("JPN"), std::string::npos);
}

TEST(TrafficReport, ReferenceRowLayout) {
  TrafficDelta d;
  d.route = CellKey{"KOR", "CHN", VesselType::Container};
  d.scenario = Scenario::StricterRegional;
  d.delta_voyages = -14;
  d.current_voyages = 8123;
  const std::vector<TrafficDelta> ds = {d};
  const auto md = render_markdown(traffic_report(ds, 10, {&kAllScenarios[1], 1}));
  EXPECT_NE(md.find("| KOR/CHN | 8123 | 14 | 0.2 |"), std::string::npos) << md;
}

}  // namespace
}  // namespace bwi
