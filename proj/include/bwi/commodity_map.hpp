#pragma once

// GTAP commodity codes, their 17 aggregated groups, and the vessel types
// that carry them. Groups whose members disagree take the majority type;
// "Metal & chemicals" is carried by both container and bulk vessels.

#include <array>
#include <optional>
#include <string_view>

#include "bwi/vessel_type.hpp"

namespace bwi {

enum class Carriage {
  None,           // not shipped by sea (services, electricity, transport)
  Single,         // one vessel type
  ContainerBulk,  // split between container and bulk
};

struct VesselAssignment {
  Carriage carriage = Carriage::None;
  VesselType type = VesselType::Container;  // meaningful for Single only
};

struct CommodityGroup {
  int number;
  std::string_view id;    // config token
  std::string_view name;  // display label
  VesselAssignment assignment;
};

struct GtapCommodity {
  std::string_view code;
  std::string_view description;
  int group;
  VesselAssignment assignment;  // the row's own vessel type
};

namespace detail {
inline constexpr VesselAssignment none{Carriage::None, VesselType::Container};
inline constexpr VesselAssignment dual{Carriage::ContainerBulk, VesselType::Container};
inline constexpr VesselAssignment single(VesselType t) { return {Carriage::Single, t}; }
}  // namespace detail

inline constexpr std::array<CommodityGroup, 17> kCommodityGroups = {{
    {1, "crop_products", "Crop products", detail::single(VesselType::Bulk)},
    {2, "wheat_grains", "Wheat & grains", detail::single(VesselType::Bulk)},
    {3, "forestry_foods", "Forestry and foods", detail::single(VesselType::Container)},
    {4, "live_animals", "Life animal", detail::single(VesselType::LivestockCarrier)},
    {5, "meats_vegetables", "Meats & vegetable", detail::single(VesselType::Refrigeration)},
    {6, "textiles", "Textiles", detail::single(VesselType::Container)},
    {7, "metal_chemicals", "Metal & chemicals", detail::dual},
    {8, "machine_equipment", "Machine & equipment", detail::single(VesselType::Container)},
    {9, "motor_vehicles", "Motor vehicles", detail::single(VesselType::VehicleCarrier)},
    {10, "electricity", "Electricity", detail::none},
    {11, "coal", "Coal", detail::single(VesselType::Bulk)},
    {12, "petroleum_products", "Petroleum products", detail::single(VesselType::Tanker)},
    {13, "crude_oil", "Crude oil", detail::single(VesselType::Tanker)},
    {14, "natural_gas", "Natural gas", detail::single(VesselType::GasCarrier)},
    {15, "water_transport", "Water transport", detail::none},
    {16, "other_transport", "Other transport", detail::none},
    {17, "other_services", "Other Services", detail::none},
}};

inline constexpr std::array<GtapCommodity, 57> kGtapCommodities = {{
    {"OCR", "Crops nec", 1, detail::single(VesselType::Bulk)},
    {"WHT", "Wheat", 2, detail::single(VesselType::Bulk)},
    {"GRO", "Cereal grains nec", 2, detail::single(VesselType::Bulk)},
    {"SGR", "Sugar", 3, detail::dual},
    {"PDR", "Paddy rice", 3, detail::single(VesselType::Container)},
    {"OSD", "Oil seeds", 3, detail::single(VesselType::Container)},
    {"C_B", "Sugar cane, sugar beet", 3, detail::single(VesselType::Container)},
    {"PFB", "Plant-based fibers", 3, detail::single(VesselType::Container)},
    {"WOL", "Wool, silk-worm cocoons", 3, detail::single(VesselType::Container)},
    {"FRS", "Forestry", 3, detail::single(VesselType::Container)},
    {"PCR", "Processed rice", 3, detail::single(VesselType::Container)},
    {"OFD", "Food products nec", 3, detail::single(VesselType::Container)},
    {"B_T", "Beverages and tobacco products", 3, detail::single(VesselType::Container)},
    {"CTL", "Cattle, sheep and goats, horses", 4, detail::single(VesselType::LivestockCarrier)},
    {"V_F", "Vegetables, fruit, nuts", 5, detail::single(VesselType::Refrigeration)},
    {"FSH", "Fishing", 5, detail::single(VesselType::Refrigeration)},
    {"CMT", "Bovine meat products", 5, detail::single(VesselType::Refrigeration)},
    {"OMT", "Meat products nec", 5, detail::single(VesselType::Refrigeration)},
    {"VOL", "Vegetable oils and fats", 5, detail::single(VesselType::Refrigeration)},
    {"MIL", "Dairy products", 5, detail::single(VesselType::Refrigeration)},
    {"OAP", "Animal products nec", 5, detail::single(VesselType::Refrigeration)},
    {"RMK", "Raw milk", 5, detail::single(VesselType::Refrigeration)},
    {"TEX", "Textiles", 6, detail::single(VesselType::Container)},
    {"WAP", "Wearing apparel", 6, detail::single(VesselType::Container)},
    {"LEA", "Leather products", 6, detail::single(VesselType::Container)},
    {"LUM", "Wood products", 6, detail::dual},
    {"PPP", "Paper products, publishing", 6, detail::single(VesselType::Container)},
    {"CRP", "Chemical, rubber, plastic", 7, detail::dual},
    {"OMN", "Minerals nec", 7, detail::dual},
    {"NMM", "Mineral products nec", 7, detail::dual},
    {"I_S", "Ferrous metals", 7, detail::dual},
    {"NFM", "Metals nec", 7, detail::dual},
    {"FMP", "Metal products", 7, detail::dual},
    {"ELE", "Electronic equipment", 8, detail::single(VesselType::Container)},
    {"OME", "Machinery and equipment nec", 8, detail::single(VesselType::Container)},
    {"OMF", "Manufactures nec", 8, detail::single(VesselType::Container)},
    {"OTN", "Transport equipment nec", 8, detail::single(VesselType::GeneralCargo)},
    {"MVH", "Motor vehicles and parts", 9, detail::single(VesselType::VehicleCarrier)},
    {"ELY", "Electricity", 10, detail::none},
    {"COA", "Coal", 11, detail::single(VesselType::Bulk)},
    {"P_C", "Petroleum, coal products", 12, detail::single(VesselType::Tanker)},
    {"OIL", "Oil", 13, detail::single(VesselType::Tanker)},
    {"GAS", "Gas", 14, detail::single(VesselType::GasCarrier)},
    {"WTP", "Water transport", 15, detail::none},
    {"OTP", "Transport nec", 16, detail::none},
    {"ATP", "Air transport", 16, detail::none},
    {"GDT", "Gas manufacture, distribution", 17, detail::none},
    {"WTR", "Water", 17, detail::none},
    {"CNS", "Construction", 17, detail::none},
    {"TRD", "Trade", 17, detail::none},
    {"CMN", "Communication", 17, detail::none},
    {"OFI", "Financial services nec", 17, detail::none},
    {"ISR", "Insurance", 17, detail::none},
    {"OBS", "Business services nec", 17, detail::none},
    {"ROS", "Recreational and other services", 17, detail::none},
    {"OSG", "Public Administration, etc.", 17, detail::none},
    {"DWE", "Dwellings", 17, detail::none},
}};

inline std::optional<CommodityGroup> find_commodity_group(std::string_view id) {
  for (const auto& g : kCommodityGroups) {
    if (g.id == id) return g;
  }
  return std::nullopt;
}

}  // namespace bwi
