#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bwi/ballast_discharge.hpp"
#include "bwi/movement_ingest.hpp"
#include "support.hpp"

namespace bwi {
namespace {

const char* kVessels =
    "vessel_id,vessel_type,dwt,build_year\n"
    "V1,Container,40000,2005\n"
    "V2,Bulk,,1999\n"
    "V3,Tanker,80000,2010\n";

const char* kPorts =
    "port_id,country\n"
    "USA1,USA\n"
    "USA2,USA\n"
    "CHN1,CHN\n"
    "JPN1,JPN\n";

VesselRegistry vessels() {
  std::istringstream in(kVessels);
  return load_vessels(in);
}

PortRegistry ports() {
  std::istringstream in(kPorts);
  return load_ports(in);
}

template <class Fn>
IngestErrorKind ingest_error(Fn&& fn) {
  try {
    fn();
  } catch (const IngestError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no IngestError thrown";
  return IngestErrorKind::MalformedRow;
}

VoyageSet movements(const std::string& rows) {
  std::istringstream in("voyage_id,vessel_id,origin_port,dest_port,depart_time,arrive_time\n" +
                        rows);
  return load_movements(in, vessels(), ports());
}

TEST(Ingest, LoadsVesselsWithOptionalDwt) {
  const auto v = vessels();
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.at("V1").dwt, 40000.0);
  EXPECT_FALSE(v.at("V2").dwt);
  EXPECT_EQ(v.at("V3").vessel_type, VesselType::Tanker);
}

TEST(Ingest, VesselErrors) {
  auto load = [](const std::string& body) {
    return [body] {
      std::istringstream in("vessel_id,vessel_type,dwt,build_year\n" + body);
      load_vessels(in);
    };
  };
  EXPECT_EQ(ingest_error(load("V1,Container,1,2000\nV1,Bulk,2,2000\n")),
            IngestErrorKind::DuplicateVesselId);
  EXPECT_EQ(ingest_error(load("V1,container,1,2000\n")), IngestErrorKind::UnknownVesselType);
  EXPECT_EQ(ingest_error(load("V1,Container,-5,2000\n")), IngestErrorKind::MalformedRow);
  EXPECT_EQ(ingest_error(load("V1,Container,5,abc\n")), IngestErrorKind::MalformedRow);
  EXPECT_EQ(ingest_error(load("V1,Container,5\n")), IngestErrorKind::MalformedRow);
}

TEST(Ingest, PortErrors) {
  auto load = [](const std::string& body) {
    return [body] {
      std::istringstream in("port_id,country\n" + body);
      load_ports(in);
    };
  };
  EXPECT_EQ(ingest_error(load("P1,USA\nP1,CHN\n")), IngestErrorKind::DuplicatePortId);
  EXPECT_EQ(ingest_error(load("P1,XYZ\n")), IngestErrorKind::UnknownCountry);
}

TEST(Ingest, DropsAndCountsDomesticMoves) {
  const auto set = movements(
      "M2,V1,CHN1,USA1,2011-02-01T00:00:00Z,2011-02-15T00:00:00Z\n"
      "M1,V1,USA1,USA2,2011-01-01T00:00:00Z,2011-01-02T00:00:00Z\n"
      "M3,V2,JPN1,CHN1,2011-01-05T00:00:00Z,2011-01-09T12:00:00Z\n");
  EXPECT_EQ(set.dropped_domestic, 1u);
  ASSERT_EQ(set.voyages.size(), 2u);
  EXPECT_EQ(set.voyages[0].voyage_id, "M2");
  EXPECT_EQ(set.voyages[0].origin_country, "CHN");
  EXPECT_DOUBLE_EQ(set.voyages[0].duration_days, 14.0);
  EXPECT_DOUBLE_EQ(set.voyages[1].duration_days, 4.5);
}

TEST(Ingest, MovementErrors) {
  EXPECT_EQ(ingest_error([] {
              movements("M1,V9,CHN1,USA1,2011-01-01T00:00:00Z,2011-01-02T00:00:00Z\n");
            }),
            IngestErrorKind::UnknownVessel);
  EXPECT_EQ(ingest_error([] {
              movements("M1,V1,CHN1,XX1,2011-01-01T00:00:00Z,2011-01-02T00:00:00Z\n");
            }),
            IngestErrorKind::UnknownPort);
  EXPECT_EQ(ingest_error([] { movements("M1,V1,CHN1,USA1,2011-01-01,2011-01-02T00:00:00Z\n"); }),
            IngestErrorKind::BadTimestamp);
  EXPECT_EQ(ingest_error([] {
              movements("M1,V1,CHN1,USA1,2011-01-02T00:00:00Z,2011-01-02T00:00:00Z\n");
            }),
            IngestErrorKind::NonPositiveDuration);
}

TEST(Ingest, HistoryCountsByDepartureYear) {
  using test::voyage;
  const std::vector<VoyageRecord> vs = {
      voyage("a", "V1", "CHN", "USA", "2011-01-10T00:00:00Z"),
      voyage("b", "V1", "USA", "JPN", "2011-02-10T00:00:00Z"),
      voyage("c", "V1", "JPN", "USA", "2010-12-31T23:00:00Z"),
      voyage("d", "V2", "JPN", "CHN", "2011-05-10T00:00:00Z"),
  };
  const auto h = build_history(vs, {"USA"}, 2011);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h.at("V1").annual_voyages, 2);
  EXPECT_EQ(h.at("V1").annual_voyages_non_stricter, 1);
  EXPECT_TRUE(h.at("V1").ever_calls_stricter);
  EXPECT_FALSE(h.at("V2").ever_calls_stricter);
}

TEST(Ingest, HistoryTotalsMatchVoyagesProperty) {
  Rng rng(5);
  const std::vector<std::string> countries = {"USA", "CHN", "JPN", "DEU"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<VoyageRecord> vs;
    const int n = static_cast<int>(rng.integer(1, 200));
    int to_usa = 0;
    for (int k = 0; k < n; ++k) {
      const auto o = countries[rng.integer(0, 3)];
      auto d = countries[rng.integer(0, 3)];
      if (d == o) d = o == "USA" ? "CHN" : "USA";
      to_usa += d == "USA";
      vs.push_back(test::voyage(std::to_string(k), fmt::format("V{}", rng.integer(0, 9)), o, d,
                                fmt::format("2011-{:02d}-01T00:00:00Z", rng.integer(1, 12))));
    }
    const auto h = build_history(vs, {"USA"}, 2011);
    int total = 0, other = 0;
    for (const auto& [id, x] : h) {
      total += x.annual_voyages;
      other += x.annual_voyages_non_stricter;
      EXPECT_EQ(x.ever_calls_stricter, x.annual_voyages > x.annual_voyages_non_stricter);
    }
    EXPECT_EQ(total, n);
    EXPECT_EQ(total - other, to_usa);
  }
}

TEST(Ingest, WritersRoundTrip) {
  const auto set = movements(
      "M1,V1,CHN1,USA1,2011-02-01T00:00:00Z,2011-02-15T06:30:00Z\n"
      "M2,V2,JPN1,CHN1,2011-01-05T00:00:00Z,2011-01-09T12:00:00Z\n");
  std::ostringstream vo, po, mo;
  write_vessels(vo, vessels());
  write_ports(po, ports());
  write_movements(mo, set.voyages);
  EXPECT_EQ(vo.str(), kVessels);
  EXPECT_EQ(po.str(), kPorts);
  std::istringstream vi(vo.str()), pi(po.str()), mi(mo.str());
  const auto v2 = load_vessels(vi);
  const auto p2 = load_ports(pi);
  const auto again = load_movements(mi, v2, p2);
  ASSERT_EQ(again.voyages.size(), 2u);
  EXPECT_EQ(again.voyages[0].arrive_time, set.voyages[0].arrive_time);
}

TEST(Discharge, PowerLawAndFallback) {
  const DischargeModel m{0.5, 1.0, 9000.0, 0.4};
  VesselRecord v{"V", VesselType::Bulk, 60000.0, 2000};
  EXPECT_DOUBLE_EQ(discharge_volume(v, m), 30000.0);
  EXPECT_DOUBLE_EQ(expected_treated_volume({}, v, m), 12000.0);
  v.dwt.reset();
  EXPECT_DOUBLE_EQ(discharge_volume(v, m), 9000.0);
}

TEST(Discharge, MonotoneInDwtProperty) {
  Rng rng(9);
  for (int k = 0; k < 500; ++k) {
    const DischargeModel m{rng.uniform(0.01, 5.0), rng.uniform(0.1, 1.5), 1000.0, 0.5};
    const double d1 = rng.uniform(1.0, 300000.0);
    const double d2 = d1 * rng.uniform(1.0001, 3.0);
    const VesselRecord a{"A", VesselType::Tanker, d1, 0}, b{"B", VesselType::Tanker, d2, 0};
    EXPECT_LT(discharge_volume(a, m), discharge_volume(b, m));
    EXPECT_NEAR(discharge_volume(b, m) / discharge_volume(a, m), std::pow(d2 / d1, m.coeff_b),
                1e-12 * std::pow(d2 / d1, m.coeff_b));
  }
}

TEST(Discharge, RejectsInvalidModels) {
  for (const DischargeModel m : {DischargeModel{0.0, 1.0, 1.0, 0.5},
                                 DischargeModel{1.0, 1.6, 1.0, 0.5},
                                 DischargeModel{1.0, 1.0, 0.0, 0.5},
                                 DischargeModel{1.0, 1.0, 1.0, 1.5}}) {
    EXPECT_THROW(m.validate(), DischargeError);
  }
}

}  // namespace
}  // namespace bwi
