#pragma once

// Vessel, port and voyage movement tables: loading, validation, the
// international-only filter, and per-vessel annual voyage histories.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <fmt/format.h>

#include "bwi/common/csv.hpp"
#include "bwi/common/error.hpp"
#include "bwi/timestamp.hpp"
#include "bwi/vessel_type.hpp"

namespace bwi {

enum class IngestErrorKind {
  MalformedRow,
  DuplicateVesselId,
  DuplicatePortId,
  UnknownVesselType,
  UnknownCountry,
  UnknownVessel,
  UnknownPort,
  NonPositiveDuration,
  BadTimestamp,
};
using IngestError = KindedError<IngestErrorKind>;

using CountrySet = std::set<std::string>;

/// The twenty individually modelled countries plus the rest-of-world code.
inline const CountrySet& default_country_set() {
  static const CountrySet set = {"AUS", "CHN", "JPN", "KOR", "SGP", "MYS", "TWN",
                                 "USA", "CAN", "MEX", "COL", "PAN", "VEN", "BEL",
                                 "DEU", "ESP", "FRA", "GBR", "NLD", "ZAF", "ROW"};
  return set;
}

struct VesselRecord {
  std::string vessel_id;
  VesselType vessel_type = VesselType::Container;
  std::optional<double> dwt;  // tonnes; absent when the source cell is empty
  int build_year = 0;
};

struct PortRecord {
  std::string port_id;
  std::string country;  // ISO-3
};

struct VoyageRecord {
  std::string voyage_id;
  std::string vessel_id;
  std::string origin_port;
  std::string dest_port;
  std::string origin_country;
  std::string dest_country;
  Timestamp depart_time;
  Timestamp arrive_time;
  double duration_days = 0.0;
};

struct VesselHistory {
  std::string vessel_id;
  int annual_voyages = 0;              // N_v
  int annual_voyages_non_stricter = 0;  // N_v_other
  bool ever_calls_stricter = false;
};

/// Keyed table that preserves source order for iteration.
template <class Record>
class Registry {
 public:
  bool insert(Record r, const std::string& key) {
    if (index_.count(key)) return false;
    index_.emplace(key, records_.size());
    records_.push_back(std::move(r));
    return true;
  }

  const Record* find(const std::string& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  const Record& at(const std::string& key) const {
    const Record* r = find(key);
    if (!r) throw std::out_of_range("unknown key " + key);
    return *r;
  }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

using VesselRegistry = Registry<VesselRecord>;
using PortRegistry = Registry<PortRecord>;

struct VoyageSet {
  std::vector<VoyageRecord> voyages;  // sorted by (vessel_id, depart_time)
  std::size_t dropped_domestic = 0;
};

inline const std::vector<std::string>& vessel_csv_header() {
  static const std::vector<std::string> h = {"vessel_id", "vessel_type", "dwt", "build_year"};
  return h;
}
inline const std::vector<std::string>& port_csv_header() {
  static const std::vector<std::string> h = {"port_id", "country"};
  return h;
}
inline const std::vector<std::string>& movement_csv_header() {
  static const std::vector<std::string> h = {"voyage_id",  "vessel_id",   "origin_port",
                                             "dest_port",  "depart_time", "arrive_time"};
  return h;
}

namespace detail {

inline std::vector<csv::Row> read_rows(std::istream& in, const std::vector<std::string>& header) {
  try {
    return csv::read(in, header);
  } catch (const csv::CsvError& e) {
    throw IngestError(IngestErrorKind::MalformedRow, e.what());
  }
}

[[noreturn]] inline void malformed(const csv::Row& row, std::string_view what) {
  throw IngestError(IngestErrorKind::MalformedRow, fmt::format("line {}: {}", row.line, what));
}

}  // namespace detail

inline VesselRegistry load_vessels(std::istream& in) {
  VesselRegistry reg;
  for (const auto& row : detail::read_rows(in, vessel_csv_header())) {
    if (row[0].empty()) detail::malformed(row, "empty vessel_id");
    const auto type = parse_vessel_type(row[1]);
    if (!type) {
      throw IngestError(IngestErrorKind::UnknownVesselType,
                        fmt::format("line {}: unknown vessel type '{}'", row.line, row[1]));
    }
    VesselRecord v{row[0], *type, std::nullopt, 0};
    if (!row[2].empty()) {
      const auto dwt = csv::parse_double(row[2]);
      if (!dwt || !(*dwt > 0.0) || !std::isfinite(*dwt)) {
        detail::malformed(row, fmt::format("dwt '{}' is not a positive number", row[2]));
      }
      v.dwt = *dwt;
    }
    const auto year = csv::parse_int(row[3]);
    if (!year) detail::malformed(row, fmt::format("build_year '{}' is not an integer", row[3]));
    v.build_year = static_cast<int>(*year);
    const std::string id = v.vessel_id;
    if (!reg.insert(std::move(v), id)) {
      throw IngestError(IngestErrorKind::DuplicateVesselId,
                        fmt::format("line {}: duplicate vessel_id '{}'", row.line, id));
    }
  }
  return reg;
}

inline PortRegistry load_ports(std::istream& in,
                               const CountrySet& countries = default_country_set()) {
  PortRegistry reg;
  for (const auto& row : detail::read_rows(in, port_csv_header())) {
    if (row[0].empty()) detail::malformed(row, "empty port_id");
    if (!countries.count(row[1])) {
      throw IngestError(IngestErrorKind::UnknownCountry,
                        fmt::format("line {}: country '{}' is not in the configured region set",
                                    row.line, row[1]));
    }
    if (!reg.insert(PortRecord{row[0], row[1]}, row[0])) {
      throw IngestError(IngestErrorKind::DuplicatePortId,
                        fmt::format("line {}: duplicate port_id '{}'", row.line, row[0]));
    }
  }
  return reg;
}

inline double days_between(Timestamp from, Timestamp to) {
  return std::chrono::duration<double, std::ratio<86400>>(to - from).count();
}

/// Loads voyages, dropping (and counting) domestic moves.
inline VoyageSet load_movements(std::istream& in, const VesselRegistry& vessels,
                                const PortRegistry& ports) {
  VoyageSet out;
  for (const auto& row : detail::read_rows(in, movement_csv_header())) {
    if (row[0].empty()) detail::malformed(row, "empty voyage_id");
    if (!vessels.find(row[1])) {
      throw IngestError(IngestErrorKind::UnknownVessel,
                        fmt::format("line {}: unknown vessel '{}'", row.line, row[1]));
    }
    const PortRecord* origin = ports.find(row[2]);
    const PortRecord* dest = ports.find(row[3]);
    if (!origin || !dest) {
      throw IngestError(IngestErrorKind::UnknownPort,
                        fmt::format("line {}: unknown port '{}'", row.line,
                                    origin ? row[3] : row[2]));
    }
    const auto depart = parse_rfc3339(row[4]);
    const auto arrive = parse_rfc3339(row[5]);
    if (!depart || !arrive) {
      throw IngestError(IngestErrorKind::BadTimestamp,
                        fmt::format("line {}: unparseable timestamp '{}'", row.line,
                                    depart ? row[5] : row[4]));
    }
    if (*arrive <= *depart) {
      throw IngestError(IngestErrorKind::NonPositiveDuration,
                        fmt::format("line {}: voyage '{}' does not arrive after departing",
                                    row.line, row[0]));
    }
    if (origin->country == dest->country) {
      ++out.dropped_domestic;
      continue;
    }
    out.voyages.push_back(VoyageRecord{row[0], row[1], row[2], row[3], origin->country,
                                       dest->country, *depart, *arrive,
                                       days_between(*depart, *arrive)});
  }
  std::stable_sort(out.voyages.begin(), out.voyages.end(),
                   [](const VoyageRecord& a, const VoyageRecord& b) {
                     if (a.vessel_id != b.vessel_id) return a.vessel_id < b.vessel_id;
                     if (a.depart_time != b.depart_time) return a.depart_time < b.depart_time;
                     return a.voyage_id < b.voyage_id;
                   });
  return out;
}

/// Voyages are assigned to the calendar year (UTC) of their departure.
inline std::map<std::string, VesselHistory> build_history(const std::vector<VoyageRecord>& voyages,
                                                          const CountrySet& stricter_region,
                                                          int year) {
  std::map<std::string, VesselHistory> out;
  for (const auto& v : voyages) {
    if (calendar_year(v.depart_time) != year) continue;
    auto& h = out[v.vessel_id];
    h.vessel_id = v.vessel_id;
    ++h.annual_voyages;
    if (!stricter_region.count(v.dest_country)) ++h.annual_voyages_non_stricter;
  }
  for (auto& [id, h] : out) {
    h.ever_calls_stricter = h.annual_voyages > h.annual_voyages_non_stricter;
  }
  return out;
}

inline void write_vessels(std::ostream& out, const VesselRegistry& vessels) {
  csv::Writer w(out);
  w.row(vessel_csv_header());
  for (const auto& v : vessels) {
    w.row(v.vessel_id, std::string(to_string(v.vessel_type)),
          v.dwt ? csv::num(*v.dwt) : std::string(), v.build_year);
  }
}

inline void write_ports(std::ostream& out, const PortRegistry& ports) {
  csv::Writer w(out);
  w.row(port_csv_header());
  for (const auto& p : ports) w.row(p.port_id, p.country);
}

inline void write_movements(std::ostream& out, const std::vector<VoyageRecord>& voyages) {
  csv::Writer w(out);
  w.row(movement_csv_header());
  for (const auto& v : voyages) {
    w.row(v.voyage_id, v.vessel_id, v.origin_port, v.dest_port, format_rfc3339(v.depart_time),
          format_rfc3339(v.arrive_time));
  }
}

}  // namespace bwi
