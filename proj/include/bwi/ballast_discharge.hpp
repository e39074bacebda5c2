#pragma once

#include <cmath>

#include <fmt/format.h>

#include "bwi/common/error.hpp"
#include "bwi/movement_ingest.hpp"

namespace bwi {

enum class DischargeErrorKind { InvalidModel };
using DischargeError = KindedError<DischargeErrorKind>;

/// Per-arrival ballast discharge as a power law in deadweight tonnage, with a
/// fleet-average fallback for vessels of unknown size and a probability that
/// an arrival discharges at all.
struct DischargeModel {
  double coeff_a = 1.0;     // tonnes
  double coeff_b = 0.8;
  double fallback_volume = 5000.0;  // tonnes
  double discharge_probability = 0.5;

  void validate() const {
    auto fail = [](std::string_view what) {
      throw DischargeError(DischargeErrorKind::InvalidModel,
                           fmt::format("discharge model: {}", what));
    };
    if (!(coeff_a > 0.0)) fail("coeff_a must be > 0");
    if (!(coeff_b > 0.0 && coeff_b <= 1.5)) fail("coeff_b must lie in (0, 1.5]");
    if (!(fallback_volume > 0.0)) fail("fallback_volume must be > 0");
    if (!(discharge_probability >= 0.0 && discharge_probability <= 1.0)) {
      fail("discharge_probability must lie in [0, 1]");
    }
  }
};

inline double discharge_volume(const VesselRecord& vessel, const DischargeModel& model) {
  if (!vessel.dwt) return model.fallback_volume;
  return model.coeff_a * std::pow(*vessel.dwt, model.coeff_b);
}

/// V_v: the expected treated volume for one international arrival.
inline double expected_treated_volume(const VoyageRecord& /*voyage*/, const VesselRecord& vessel,
                                      const DischargeModel& model) {
  return model.discharge_probability * discharge_volume(vessel, model);
}

}  // namespace bwi
