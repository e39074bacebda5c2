#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "bwi/compliance_cost.hpp"
#include "support.hpp"

namespace bwi {
namespace {

// Present value of a level payment summed term by term.
double pv_of_payment(double payment, int years, double d, double i) {
  const double r = (1.0 + d) / (1.0 + i) - 1.0;
  double pv = 0.0;
  for (int t = 1; t <= years; ++t) pv += payment / std::pow(1.0 + r, t);
  return pv;
}

BwtsCostParams sample_params() {
  BwtsCostParams p;
  p.c_v_imo_pv = 1'000'000;
  p.o_v_imo = 25'000;
  p.t_imo = 0.05;
  p.c_barge_pv = 10'000'000;
  p.c_p_us_pv = 5'000'000;
  p.o_p_us = 2'000'000;
  p.t_us = 0.2;
  p.t_tug = 5'000;
  p.p_stricter = 4;
  return p;
}

TEST(Annuity, MatchesTermByTermPresentValue) {
  for (const double d : {0.03, 0.06, 0.1}) {
    for (const int years : {1, 10, 30}) {
      const double a = annualize(1e6, years, d, 0.025);
      EXPECT_NEAR(pv_of_payment(a, years, d, 0.025), 1e6, 1e-10 * 1e6);
    }
  }
}

TEST(Annuity, ZeroRealRateIsStraightLine) {
  EXPECT_DOUBLE_EQ(annualize(3e6, 30, 0.025, 0.025), 1e5);
}

TEST(Annuity, TinyRealRateHasNoCancellation) {
  const double a = annualize(1e6, 30, 0.02500001, 0.025);
  EXPECT_NEAR(pv_of_payment(a, 30, 0.02500001, 0.025), 1e6, 1e-6);
}

TEST(Annuity, DiscountBelowInflationIsDegenerate) {
  try {
    annualize(1e6, 30, 0.02, 0.03);
    FAIL();
  } catch (const CostError& e) {
    EXPECT_EQ(e.kind(), CostErrorKind::DegenerateRate);
  }
  EXPECT_THROW(annualize(1e6, 0, 0.06, 0.025), CostError);
}

TEST(Annuity, PresentValueOracleProperty) {
  Rng rng(17);
  for (int k = 0; k < 300; ++k) {
    const double i = rng.uniform(0.0, 0.05);
    const double d = i + rng.uniform(0.0, 0.1);
    const int years = static_cast<int>(rng.integer(1, 40));
    const double pv = rng.uniform(1e3, 1e8);
    const double a = annualize(pv, years, d, i);
    EXPECT_NEAR(pv_of_payment(a, years, d, i), pv, 1e-10 * pv);
  }
}

TEST(Midpoint, FlagsWideRanges) {
  const auto m = midpoint_param(750'000, 1'250'000);
  EXPECT_DOUBLE_EQ(m.value, 1'000'000);
  EXPECT_TRUE(m.within_bounds);
  EXPECT_FALSE(midpoint_param(1, 9).within_bounds);
  EXPECT_TRUE(midpoint_param(5, 5).within_bounds);
}

TEST(Midpoint, RejectsBadBounds) {
  try {
    midpoint_param(-1, 2);
    FAIL();
  } catch (const CostError& e) {
    EXPECT_EQ(e.kind(), CostErrorKind::NegativeBound);
  }
  try {
    midpoint_param(3, 2);
    FAIL();
  } catch (const CostError& e) {
    EXPECT_EQ(e.kind(), CostErrorKind::InvertedBounds);
  }
}

TEST(CostEquations, HandComputedValues) {
  const auto p = sample_params();
  const auto a = annualize_params(p);
  const double vessel = annualize(1e6, 30, 0.06, 0.025) + 25'000;
  EXPECT_DOUBLE_EQ(a.vessel_bwts(), vessel);
  EXPECT_DOUBLE_EQ(cost_eq1(p, a, 10, 20'000), vessel / 10 + 0.05 * 20'000);
  EXPECT_DOUBLE_EQ(cost_eq3(p, a, 4, 20'000), vessel / 4 + 0.05 * 20'000);
  const double barge = annualize(1e7, 30, 0.06, 0.025) + annualize(5e6, 30, 0.06, 0.025) + 2e6;
  EXPECT_DOUBLE_EQ(cost_eq2(p, a, 20'000, 80'000, 0.5),
                   barge * 4 * 0.25 + 0.2 * 20'000 + 5'000 * 0.5);
}

TEST(CostEquations, Errors) {
  const auto p = sample_params();
  const auto a = annualize_params(p);
  auto kind = [](auto&& fn) {
    try {
      fn();
    } catch (const CostError& e) {
      return e.kind();
    }
    return CostErrorKind::InvalidParams;
  };
  EXPECT_EQ(kind([&] { cost_eq1(p, a, 0, 1.0); }), CostErrorKind::ZeroVoyages);
  EXPECT_EQ(kind([&] { cost_eq3(p, a, 0, 1.0); }), CostErrorKind::ZeroNonStricterVoyages);
  EXPECT_EQ(kind([&] { cost_eq2(p, a, 1.0, 0.0); }), CostErrorKind::EmptyStricterVolume);
  EXPECT_EQ(kind([&] { cost_eq2(p, a, 2.0, 1.0); }), CostErrorKind::InvalidVolume);
  EXPECT_EQ(kind([&] { cost_eq1(p, a, 1, -1.0); }), CostErrorKind::InvalidVolume);
  auto bad = p;
  bad.t_us = 0.01;
  EXPECT_THROW(bad.validate(), CostError);
}

// A random fleet where every vessel that calls the stricter region also has
// at least one voyage elsewhere.
struct Fleet {
  VesselRegistry vessels;
  std::vector<VoyageRecord> voyages;
  std::map<std::string, VesselHistory> histories;
};

Fleet random_fleet(Rng& rng) {
  const std::vector<std::string> others = {"CHN", "JPN", "DEU", "BRA"};
  Fleet f;
  const int n_vessels = static_cast<int>(rng.integer(1, 30));
  int id = 0;
  for (int v = 0; v < n_vessels; ++v) {
    const std::string vid = fmt::format("V{}", v);
    std::optional<double> dwt;
    if (rng.uniform() > 0.1) dwt = rng.uniform(5e3, 2e5);
    f.vessels.insert({vid, kAllVesselTypes[rng.integer(0, 2)], dwt, 2000}, vid);
    const int n = static_cast<int>(rng.integer(1, 20));
    const bool calls_usa = rng.uniform() < 0.5;
    for (int k = 0; k < n; ++k) {
      std::string dest = others[rng.integer(0, 3)];
      if (calls_usa && k > 0 && rng.uniform() < 0.5) dest = "USA";
      const std::string origin = dest == "CHN" ? "JPN" : "CHN";
      f.voyages.push_back(test::voyage(fmt::format("M{}", id++), vid, origin, dest,
                                       fmt::format("2011-{:02d}-10T00:00:00Z", k % 12 + 1)));
    }
  }
  f.histories = build_history(f.voyages, {"USA"}, 2011);
  return f;
}

TEST(FleetCosts, ConsistentUsesOnboardEverywhere) {
  Rng rng(21);
  const auto f = random_fleet(rng);
  const DischargeModel dm{0.4, 1.0, 8000, 0.5};
  const auto costs = cost_fleet(f.voyages, f.vessels, f.histories, {"USA"}, sample_params(), dm,
                                CostOptions{true, 0.5});
  for (const auto& c : costs.consistent) EXPECT_EQ(c.equation, CostEquation::Eq1);
}

TEST(FleetCosts, StricterEquationFollowsClass) {
  Rng rng(22);
  const auto f = random_fleet(rng);
  const DischargeModel dm{0.4, 1.0, 8000, 0.5};
  const auto costs = cost_fleet(f.voyages, f.vessels, f.histories, {"USA"}, sample_params(), dm,
                                CostOptions{true, 0.5});
  for (std::size_t k = 0; k < f.voyages.size(); ++k) {
    const auto expected = costs.classes[k] == VoyageClass::NonStricterVessel ? CostEquation::Eq1
                          : costs.classes[k] == VoyageClass::StricterVesselToStricter
                              ? CostEquation::Eq2
                              : CostEquation::Eq3;
    EXPECT_EQ(costs.stricter[k].equation, expected);
  }
}

TEST(FleetCosts, PerVoyageSumEqualsFleetModelProperty) {
  Rng rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = random_fleet(rng);
    const DischargeModel dm{rng.uniform(0.1, 1.0), rng.uniform(0.7, 1.2), 8000,
                            rng.uniform(0.1, 1.0)};
    const CostOptions opt{rng.uniform() < 0.5, dm.discharge_probability};
    const auto p = sample_params();
    const auto costs = cost_fleet(f.voyages, f.vessels, f.histories, {"USA"}, p, dm, opt);
    for (const Scenario s : kAllScenarios) {
      const double per_voyage = fleet_total(costs.costs(s))[s];
      const double model =
          fleet_model_total(s, f.voyages, costs.treated_volume, {"USA"}, p, opt);
      EXPECT_NEAR(per_voyage, model, 1e-9 * model) << to_string(s);
    }
  }
}

TEST(FleetCosts, BargeCostIsFullyAllocatedProperty) {
  Rng rng(24);
  for (int trial = 0; trial < 60; ++trial) {
    const auto f = random_fleet(rng);
    const DischargeModel dm{0.4, 1.0, 8000, 0.5};
    const auto p = sample_params();
    const auto a = annualize_params(p);
    const auto costs = cost_fleet(f.voyages, f.vessels, f.histories, {"USA"}, p, dm, {});
    if (costs.stricter_volume_total == 0.0) continue;
    double allocated = 0.0;
    for (std::size_t k = 0; k < f.voyages.size(); ++k) {
      if (costs.classes[k] != VoyageClass::StricterVesselToStricter) continue;
      allocated += a.barge_system() * p.p_stricter * costs.treated_volume[k] /
                   costs.stricter_volume_total;
    }
    EXPECT_NEAR(allocated, p.p_stricter * a.barge_system(),
                1e-9 * p.p_stricter * a.barge_system());
  }
}

TEST(FleetCosts, MissingHistoryIsAnError) {
  Rng rng(25);
  auto f = random_fleet(rng);
  f.histories.erase(f.histories.begin());
  EXPECT_THROW(cost_fleet(f.voyages, f.vessels, f.histories, {"USA"}, sample_params(),
                          DischargeModel{}, {}),
               CostError);
}

}  // namespace
}  // namespace bwi
