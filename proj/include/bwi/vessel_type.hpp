#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace bwi {

enum class VesselType {
  Container,
  Bulk,
  Tanker,
  LivestockCarrier,
  Refrigeration,
  GeneralCargo,
  VehicleCarrier,
  GasCarrier,
};

inline constexpr std::array<VesselType, 8> kAllVesselTypes = {
    VesselType::Container,     VesselType::Bulk,         VesselType::Tanker,
    VesselType::LivestockCarrier, VesselType::Refrigeration, VesselType::GeneralCargo,
    VesselType::VehicleCarrier, VesselType::GasCarrier,
};

inline constexpr std::string_view to_string(VesselType t) {
  switch (t) {
    case VesselType::Container: return "Container";
    case VesselType::Bulk: return "Bulk";
    case VesselType::Tanker: return "Tanker";
    case VesselType::LivestockCarrier: return "LivestockCarrier";
    case VesselType::Refrigeration: return "Refrigeration";
    case VesselType::GeneralCargo: return "GeneralCargo";
    case VesselType::VehicleCarrier: return "VehicleCarrier";
    case VesselType::GasCarrier: return "GasCarrier";
  }
  return "?";
}

/// Exact, case-sensitive match on the enum names.
inline std::optional<VesselType> parse_vessel_type(std::string_view token) {
  for (const VesselType t : kAllVesselTypes) {
    if (to_string(t) == token) return t;
  }
  return std::nullopt;
}

}  // namespace bwi
