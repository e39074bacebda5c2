#pragma once

// Per-voyage ballast water compliance cost under a uniform IMO-standard
// regime (Consistent) and under a regime in which a stricter region treats
// arriving ballast water with shared barge-based systems (StricterRegional).

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "bwi/ballast_discharge.hpp"
#include "bwi/common/error.hpp"
#include "bwi/common/parallel.hpp"
#include "bwi/movement_ingest.hpp"

namespace bwi {

enum class CostErrorKind {
  DegenerateRate,
  NegativeBound,
  InvertedBounds,
  InvalidParams,
  ZeroVoyages,
  EmptyStricterVolume,
  ZeroNonStricterVoyages,
  InvalidVolume,
  MissingHistory,
};
using CostError = KindedError<CostErrorKind>;

enum class Scenario { Consistent, StricterRegional };
inline constexpr Scenario kAllScenarios[] = {Scenario::Consistent, Scenario::StricterRegional};

inline constexpr std::string_view to_string(Scenario s) {
  return s == Scenario::Consistent ? "Consistent" : "StricterRegional";
}

inline std::optional<Scenario> parse_scenario(std::string_view s) {
  if (s == "Consistent") return Scenario::Consistent;
  if (s == "StricterRegional") return Scenario::StricterRegional;
  return std::nullopt;
}

enum class VoyageClass { NonStricterVessel, StricterVesselToStricter, StricterVesselToNonStricter };

enum class CostEquation { Eq1, Eq2, Eq3 };

inline constexpr std::string_view to_string(CostEquation e) {
  switch (e) {
    case CostEquation::Eq1: return "Eq1";
    case CostEquation::Eq2: return "Eq2";
    case CostEquation::Eq3: return "Eq3";
  }
  return "?";
}

inline std::optional<CostEquation> parse_equation(std::string_view s) {
  if (s == "Eq1") return CostEquation::Eq1;
  if (s == "Eq2") return CostEquation::Eq2;
  if (s == "Eq3") return CostEquation::Eq3;
  return std::nullopt;
}

/// Monetary inputs in USD. Capital items are present values that are
/// annualized over `lifetime_years`; operating items are already annual.
struct BwtsCostParams {
  double c_v_imo_pv = 0.0;  // vessel-based IMO system, capital + installation
  double o_v_imo = 0.0;     // per year
  double t_imo = 0.0;       // per tonne treated
  double c_barge_pv = 0.0;  // one barge
  double c_p_us_pv = 0.0;   // one barge-mounted stricter system
  double o_p_us = 0.0;      // per year, barge and stricter system combined
  double t_us = 0.0;        // per tonne treated
  double t_tug = 0.0;       // per treatment
  double p_stricter = 0.0;  // equipped stricter-region ports
  int lifetime_years = 30;
  double discount_rate = 0.06;
  double inflation_rate = 0.025;

  void validate() const {
    auto fail = [](std::string_view what) {
      throw CostError(CostErrorKind::InvalidParams, fmt::format("cost parameters: {}", what));
    };
    for (const double v : {c_v_imo_pv, o_v_imo, t_imo, c_barge_pv, c_p_us_pv, o_p_us, t_us,
                           t_tug, p_stricter}) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail("monetary fields must be finite and >= 0");
    }
    if (t_us < t_imo) fail("t_us must be >= t_imo");
    if (lifetime_years < 1) fail("lifetime_years must be >= 1");
    if (discount_rate < inflation_rate) fail("discount_rate must not be below inflation_rate");
  }
};

/// Real-rate annuity: the constant annual payment whose present value at
/// r = (1+d)/(1+i) - 1 over `lifetime_years` equals `present_value`.
inline double annualize(double present_value, int lifetime_years, double discount_rate,
                        double inflation_rate) {
  if (lifetime_years < 1) {
    throw CostError(CostErrorKind::InvalidParams, "annualize: lifetime_years must be >= 1");
  }
  if (!(inflation_rate > -1.0) || discount_rate < inflation_rate) {
    throw CostError(CostErrorKind::DegenerateRate,
                    fmt::format("annualize: discount rate {} is below inflation rate {}",
                                discount_rate, inflation_rate));
  }
  const double r = (1.0 + discount_rate) / (1.0 + inflation_rate) - 1.0;
  if (r == 0.0) return present_value / lifetime_years;
  // -expm1(-L*log1p(r)) == 1 - (1+r)^-L without cancellation for small r.
  return present_value * r / -std::expm1(-lifetime_years * std::log1p(r));
}

struct AnnualizedCosts {
  double vessel_capital = 0.0;
  double vessel_operating = 0.0;
  double barge_capital = 0.0;
  double stricter_capital = 0.0;
  double stricter_operating = 0.0;

  /// C_v-imo + O_v-imo, per vessel per year.
  double vessel_bwts() const { return vessel_capital + vessel_operating; }
  /// C_barge + C_p-us + O_p-us, per equipped port per year.
  double barge_system() const { return barge_capital + stricter_capital + stricter_operating; }
};

inline AnnualizedCosts annualize_params(const BwtsCostParams& p) {
  const auto ann = [&](double pv) {
    return annualize(pv, p.lifetime_years, p.discount_rate, p.inflation_rate);
  };
  return {ann(p.c_v_imo_pv), p.o_v_imo, ann(p.c_barge_pv), ann(p.c_p_us_pv), p.o_p_us};
}

struct Midpoint {
  double value = 0.0;
  bool within_bounds = true;  // low >= 0.75*mid and high <= 1.5*mid
};

inline Midpoint midpoint_param(double low, double high) {
  if (low < 0.0 || high < 0.0) {
    throw CostError(CostErrorKind::NegativeBound,
                    fmt::format("midpoint: negative bound ({}, {})", low, high));
  }
  if (low > high) {
    throw CostError(CostErrorKind::InvertedBounds,
                    fmt::format("midpoint: low {} exceeds high {}", low, high));
  }
  const double mid = 0.5 * (low + high);
  return {mid, low >= 0.75 * mid && high <= 1.5 * mid};
}

inline VoyageClass classify(const VoyageRecord& voyage, const VesselHistory& history,
                            const CountrySet& stricter_region) {
  if (!history.ever_calls_stricter) return VoyageClass::NonStricterVessel;
  return stricter_region.count(voyage.dest_country) ? VoyageClass::StricterVesselToStricter
                                                    : VoyageClass::StricterVesselToNonStricter;
}

/// Onboard IMO system shared equally across the vessel's N_v treatments.
inline double cost_eq1(const BwtsCostParams& params, const AnnualizedCosts& annual, int n_v,
                       double v_v) {
  if (n_v <= 0) throw CostError(CostErrorKind::ZeroVoyages, "onboard cost needs at least one annual voyage");
  if (v_v < 0.0) throw CostError(CostErrorKind::InvalidVolume, "negative treated volume");
  return annual.vessel_bwts() / n_v + params.t_imo * v_v;
}

/// Barge-based stricter treatment. The barge fleet's annual cost is split
/// across stricter-destination voyages by volume share; `tug_weight` scales
/// the per-treatment tug charge (1 for a certain treatment).
inline double cost_eq2(const BwtsCostParams& params, const AnnualizedCosts& annual, double v_v,
                       double v_all_stricter, double tug_weight = 1.0) {
  if (v_v < 0.0 || v_all_stricter < 0.0) {
    throw CostError(CostErrorKind::InvalidVolume, "negative treated volume");
  }
  double share = 0.0;
  if (v_all_stricter == 0.0) {
    if (v_v > 0.0) {
      throw CostError(CostErrorKind::EmptyStricterVolume,
                      "barge cost needs a positive stricter-region volume");
    }
  } else {
    if (v_v > v_all_stricter * (1.0 + 1e-12)) {
      throw CostError(CostErrorKind::InvalidVolume,
                      "voyage volume exceeds the stricter-region total");
    }
    share = v_v / v_all_stricter;
  }
  return annual.barge_system() * params.p_stricter * share + params.t_us * v_v +
         params.t_tug * tug_weight;
}

/// Onboard IMO system shared across the vessel's non-stricter treatments.
inline double cost_eq3(const BwtsCostParams& params, const AnnualizedCosts& annual,
                       int n_v_other, double v_v) {
  if (n_v_other <= 0) {
    throw CostError(CostErrorKind::ZeroNonStricterVoyages,
                    "onboard cost needs at least one non-stricter treatment");
  }
  if (v_v < 0.0) throw CostError(CostErrorKind::InvalidVolume, "negative treated volume");
  return annual.vessel_bwts() / n_v_other + params.t_imo * v_v;
}

struct CostOptions {
  /// Multiply the per-treatment tug charge by the discharge probability so
  /// every barge-treatment term is an expectation.
  bool tug_scales_with_probability = true;
  double discharge_probability = 0.5;

  double tug_weight() const { return tug_scales_with_probability ? discharge_probability : 1.0; }
};

struct VoyageContext {
  int n_v = 0;
  int n_v_other = 0;
  double v_v = 0.0;
  double v_all_stricter = 0.0;
};

struct VoyageCost {
  std::string voyage_id;
  Scenario scenario = Scenario::Consistent;
  double compliance_cost = 0.0;
  CostEquation equation = CostEquation::Eq1;
};

inline VoyageCost scenario_voyage_cost(const VoyageRecord& voyage, VoyageClass cls,
                                       Scenario scenario, const BwtsCostParams& params,
                                       const AnnualizedCosts& annual, const VoyageContext& ctx,
                                       const CostOptions& options = {}) {
  VoyageCost out{voyage.voyage_id, scenario, 0.0, CostEquation::Eq1};
  if (scenario == Scenario::Consistent || cls == VoyageClass::NonStricterVessel) {
    out.compliance_cost = cost_eq1(params, annual, ctx.n_v, ctx.v_v);
  } else if (cls == VoyageClass::StricterVesselToStricter) {
    out.equation = CostEquation::Eq2;
    out.compliance_cost =
        cost_eq2(params, annual, ctx.v_v, ctx.v_all_stricter, options.tug_weight());
  } else {
    out.equation = CostEquation::Eq3;
    out.compliance_cost = cost_eq3(params, annual, ctx.n_v_other, ctx.v_v);
  }
  return out;
}

/// Per-voyage results for one year of traffic, both scenarios, aligned with
/// the input voyage order.
struct FleetCosts {
  std::vector<VoyageClass> classes;
  std::vector<double> treated_volume;  // V_v
  double stricter_volume_total = 0.0;  // V_all-stricter
  std::vector<VoyageCost> consistent;
  std::vector<VoyageCost> stricter;

  const std::vector<VoyageCost>& costs(Scenario s) const {
    return s == Scenario::Consistent ? consistent : stricter;
  }
};

/// Two-phase fleet costing: a sequential pass collects V_v and the
/// stricter-region volume total, then voyages are costed in parallel.
inline FleetCosts cost_fleet(std::span<const VoyageRecord> voyages, const VesselRegistry& vessels,
                             const std::map<std::string, VesselHistory>& histories,
                             const CountrySet& stricter_region, const BwtsCostParams& params,
                             const DischargeModel& discharge, const CostOptions& options) {
  params.validate();
  discharge.validate();
  const AnnualizedCosts annual = annualize_params(params);
  const std::size_t n = voyages.size();

  FleetCosts out;
  out.classes.resize(n);
  out.treated_volume.resize(n);
  std::vector<const VesselHistory*> hist(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& v = voyages[k];
    const auto it = histories.find(v.vessel_id);
    if (it == histories.end()) {
      throw CostError(CostErrorKind::MissingHistory,
                      fmt::format("no voyage history for vessel '{}'", v.vessel_id));
    }
    hist[k] = &it->second;
    out.classes[k] = classify(v, it->second, stricter_region);
    out.treated_volume[k] = expected_treated_volume(v, vessels.at(v.vessel_id), discharge);
    if (out.classes[k] == VoyageClass::StricterVesselToStricter) {
      out.stricter_volume_total += out.treated_volume[k];
    }
  }

  out.consistent.resize(n);
  out.stricter.resize(n);
  parallel_for(n, [&](std::size_t k) {
    const VoyageContext ctx{hist[k]->annual_voyages, hist[k]->annual_voyages_non_stricter,
                            out.treated_volume[k], out.stricter_volume_total};
    out.consistent[k] = scenario_voyage_cost(voyages[k], out.classes[k], Scenario::Consistent,
                                             params, annual, ctx, options);
    out.stricter[k] = scenario_voyage_cost(voyages[k], out.classes[k],
                                           Scenario::StricterRegional, params, annual, ctx,
                                           options);
  });
  return out;
}

/// Sum of per-voyage compliance costs, by scenario, in input order.
inline std::map<Scenario, double> fleet_total(std::span<const VoyageCost> costs) {
  std::map<Scenario, double> out;
  for (const auto& c : costs) out[c.scenario] += c.compliance_cost;
  return out;
}

/// The aggregate fleet model, built from vessel counts and volume totals
/// rather than per-voyage allocation:
///   Consistent  = n_vessels * vessel_bwts + T_imo * sum V
///   Stricter    = n_vessels_with_other * vessel_bwts + T_imo * sum_other V
///               + P * barge_system + T_us * sum_stricter V + T_tug * w * n_stricter
/// A vessel whose voyages all end in the stricter region carries no onboard
/// cost in the stricter regime; the barge term applies once any stricter
/// volume is treated.
inline double fleet_model_total(Scenario scenario, std::span<const VoyageRecord> voyages,
                                std::span<const double> treated_volume,
                                const CountrySet& stricter_region, const BwtsCostParams& params,
                                const CostOptions& options) {
  const AnnualizedCosts annual = annualize_params(params);
  std::set<std::string> vessels_all;
  std::set<std::string> vessels_other;
  for (const auto& v : voyages) vessels_all.insert(v.vessel_id);
  double volume_all = 0.0, volume_other = 0.0, volume_stricter = 0.0;
  double stricter_treatments = 0.0;
  for (std::size_t k = 0; k < voyages.size(); ++k) {
    const auto& v = voyages[k];
    volume_all += treated_volume[k];
    if (stricter_region.count(v.dest_country)) {
      volume_stricter += treated_volume[k];
      stricter_treatments += 1.0;
    } else {
      volume_other += treated_volume[k];
      vessels_other.insert(v.vessel_id);
    }
  }
  if (scenario == Scenario::Consistent) {
    return static_cast<double>(vessels_all.size()) * annual.vessel_bwts() +
           params.t_imo * volume_all;
  }
  const double barge = volume_stricter > 0.0 ? params.p_stricter * annual.barge_system() : 0.0;
  return static_cast<double>(vessels_other.size()) * annual.vessel_bwts() +
         params.t_imo * volume_other + barge + params.t_us * volume_stricter +
         params.t_tug * options.tug_weight() * stricter_treatments;
}

}  // namespace bwi
