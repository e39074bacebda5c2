#pragma once

// Social accounting matrix: account layout, CSV form, route margin rates,
// balancing, and a seeded synthetic economy.
//
// Entry (row, col) is a payment from the column account to the row account.
// Accounts per region r and sector i:
//   ACT.r.i  producer of i in r: sells to ARM columns (and TRN for water
//            transport); buys intermediates, factors, and pays output tax
//   ARM.r.i  composite of i used in r: buys domestic and imported i (imports
//            at FOB from ACT.s.i) plus transport margins from TRN
//   LAB.r, CAP.r, HH.r, GOV.r, INV.r
// and one global account TRN, the pool of water transport services.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "bwi/cge/config.hpp"
#include "bwi/common/csv.hpp"
#include "bwi/common/rng.hpp"

namespace bwi::cge {

inline std::string act_label(const std::string& r, const std::string& i) { return "ACT." + r + "." + i; }
inline std::string arm_label(const std::string& r, const std::string& i) { return "ARM." + r + "." + i; }
inline std::string lab_label(const std::string& r) { return "LAB." + r; }
inline std::string cap_label(const std::string& r) { return "CAP." + r; }
inline std::string hh_label(const std::string& r) { return "HH." + r; }
inline std::string gov_label(const std::string& r) { return "GOV." + r; }
inline std::string inv_label(const std::string& r) { return "INV." + r; }
inline const std::string kTransportPool = "TRN";

struct Sam {
  std::vector<std::string> labels;
  Eigen::MatrixXd flows;

  Sam() = default;
  explicit Sam(std::vector<std::string> account_labels) : labels(std::move(account_labels)) {
    flows = Eigen::MatrixXd::Zero(labels.size(), labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) index_.emplace(labels[k], k);
  }

  std::size_t size() const { return labels.size(); }

  std::size_t index(const std::string& label) const {
    const auto it = index_.find(label);
    if (it == index_.end()) {
      throw CgeError(CgeErrorKind::MalformedSam, fmt::format("SAM has no account '{}'", label));
    }
    return it->second;
  }

  bool has(const std::string& label) const { return index_.count(label) > 0; }

  double& at(const std::string& row, const std::string& col) {
    return flows(index(row), index(col));
  }
  double at(const std::string& row, const std::string& col) const {
    return flows(index(row), index(col));
  }

  double row_sum(const std::string& label) const { return flows.row(index(label)).sum(); }
  double col_sum(const std::string& label) const { return flows.col(index(label)).sum(); }

  /// Largest |row sum - column sum| relative to the larger of the two.
  double max_imbalance() const {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < flows.rows(); ++k) {
      const double r = flows.row(k).sum();
      const double c = flows.col(k).sum();
      const double scale = std::max(std::abs(r), std::abs(c));
      if (scale > 0.0) worst = std::max(worst, std::abs(r - c) / scale);
    }
    return worst;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

/// Account list for a config, in a fixed order.
inline std::vector<std::string> sam_accounts(const EconomyConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& r : cfg.regions) {
    for (const auto& s : cfg.sectors) out.push_back(act_label(r.id, s.id));
    for (const auto& s : cfg.sectors) {
      if (s.group != "water_transport") out.push_back(arm_label(r.id, s.id));
    }
    out.push_back(lab_label(r.id));
    out.push_back(cap_label(r.id));
    out.push_back(hh_label(r.id));
    out.push_back(gov_label(r.id));
    out.push_back(inv_label(r.id));
  }
  out.push_back(kTransportPool);
  return out;
}

inline void write_sam(std::ostream& out, const Sam& sam) {
  out << "account";
  for (const auto& l : sam.labels) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < sam.size(); ++r) {
    out << sam.labels[r];
    for (std::size_t c = 0; c < sam.size(); ++c) out << ',' << csv::num(sam.flows(r, c));
    out << '\n';
  }
}

inline Sam read_sam(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!csv::trim(line).empty()) header = csv::split(line);
  }
  if (header.size() < 2 || header[0] != "account") {
    throw CgeError(CgeErrorKind::MalformedSam, "sam.csv must start with an 'account' header");
  }
  Sam sam(std::vector<std::string>(header.begin() + 1, header.end()));
  std::vector<bool> seen(sam.size(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw CgeError(CgeErrorKind::MalformedSam,
                     fmt::format("sam.csv line {}: expected {} fields", line_no, header.size()));
    }
    if (!sam.has(fields[0])) {
      throw CgeError(CgeErrorKind::MalformedSam,
                     fmt::format("sam.csv line {}: unknown row account '{}'", line_no, fields[0]));
    }
    const std::size_t r = sam.index(fields[0]);
    if (seen[r]) {
      throw CgeError(CgeErrorKind::MalformedSam,
                     fmt::format("sam.csv line {}: repeated row '{}'", line_no, fields[0]));
    }
    seen[r] = true;
    for (std::size_t c = 0; c < sam.size(); ++c) {
      const auto v = csv::parse_double(fields[c + 1]);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        throw CgeError(CgeErrorKind::MalformedSam,
                       fmt::format("sam.csv line {}: flows must be finite and >= 0", line_no));
      }
      sam.flows(r, c) = *v;
    }
  }
  for (std::size_t r = 0; r < sam.size(); ++r) {
    if (!seen[r]) {
      throw CgeError(CgeErrorKind::MalformedSam,
                     fmt::format("sam.csv has no row for '{}'", sam.labels[r]));
    }
  }
  return sam;
}

struct RouteKey {
  std::string origin;
  std::string dest;
  std::string sector;

  auto operator<=>(const RouteKey&) const = default;
};

/// Benchmark ad valorem transport margin per route: margin paid / FOB value.
using MarginTable = std::map<RouteKey, double>;

inline const std::vector<std::string>& margins_csv_header() {
  static const std::vector<std::string> h = {"origin", "dest", "sector", "rate"};
  return h;
}

inline void write_margins(std::ostream& out, const MarginTable& margins) {
  csv::Writer w(out);
  w.row(margins_csv_header());
  for (const auto& [k, rate] : margins) w.row(k.origin, k.dest, k.sector, rate);
}

inline MarginTable read_margins(std::istream& in) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::read(in, margins_csv_header());
  } catch (const csv::CsvError& e) {
    throw CgeError(CgeErrorKind::MalformedSam, e.what());
  }
  MarginTable out;
  for (const auto& row : rows) {
    const auto v = csv::parse_double(row[3]);
    if (!v || !(*v >= 0.0) || !std::isfinite(*v)) {
      throw CgeError(CgeErrorKind::MalformedSam,
                     fmt::format("margins.csv line {}: rate must be finite and >= 0", row.line));
    }
    out[RouteKey{row[0], row[1], row[2]}] = *v;
  }
  return out;
}

struct Economy {
  EconomyConfig config;
  Sam sam;
  MarginTable margins;
};

/// Diagonal-similarity balancing: repeatedly scale account k's row by f and
/// its column by 1/f with f = sqrt(column sum / row sum). Zero entries stay
/// zero; for an irreducible flow pattern this converges to row sums equal to
/// column sums.
inline void balance_sam(Sam& sam, double tolerance = 1e-13, int max_sweeps = 100000) {
  auto& a = sam.flows;
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (sam.max_imbalance() < tolerance) return;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double off_row = a.row(k).sum() - a(k, k);
      const double off_col = a.col(k).sum() - a(k, k);
      if (off_row <= 0.0 || off_col <= 0.0) continue;
      const double f = std::sqrt(off_col / off_row);
      a.row(k) *= f;
      a.col(k) /= f;
    }
  }
  throw CgeError(CgeErrorKind::BalanceFailure,
                 fmt::format("SAM did not balance within {} sweeps (imbalance {})", max_sweeps,
                             sam.max_imbalance()));
}

/// Share of world value added earned by the water transport sector.
inline double water_transport_va_share(const EconomyConfig& cfg, const Sam& sam) {
  const auto& wt = cfg.sectors[cfg.water_transport_index()].id;
  double wt_va = 0.0, total_va = 0.0;
  for (const auto& r : cfg.regions) {
    for (const auto& s : cfg.sectors) {
      const double va = sam.at(lab_label(r.id), act_label(r.id, s.id)) +
                        sam.at(cap_label(r.id), act_label(r.id, s.id));
      total_va += va;
      if (s.id == wt) wt_va += va;
    }
  }
  return wt_va / total_va;
}

namespace detail {

inline double base_margin_rate(VesselAssignment a) {
  if (a.carriage == Carriage::ContainerBulk) return 0.07;
  if (a.carriage == Carriage::None) return 0.0;
  switch (a.type) {
    case VesselType::Container: return 0.05;
    case VesselType::Bulk: return 0.10;
    case VesselType::Tanker: return 0.07;
    default: return 0.06;
  }
}

}  // namespace detail

/// A seeded, balanced benchmark economy. Tradable sectors (those carried by
/// sea) trade between every pair of regions; other sectors are consumed
/// where produced. Water transport sells only to the global margin pool, and
/// its value-added share of world GDP is driven to the configured target.
/// `margin_factor(s, r, i)` scales the base margin rate of each route; when
/// empty, a random symmetric factor is drawn per region pair.
using MarginFactorFn = std::function<double(std::size_t, std::size_t, std::size_t)>;

inline Economy build_synthetic_sam(const EconomyConfig& cfg, std::uint64_t seed,
                                   const MarginFactorFn& margin_factor = {}) {
  cfg.validate();
  Rng rng(seed);
  Sam sam(sam_accounts(cfg));
  const std::size_t wt = cfg.water_transport_index();
  const auto& wt_id = cfg.sectors[wt].id;

  double weight_total = 0.0;
  for (const auto& s : cfg.sectors) {
    if (s.group != "water_transport") weight_total += s.output_weight;
  }
  std::size_t fuel = cfg.sectors.size();
  for (std::size_t k = 0; k < cfg.sectors.size(); ++k) {
    if (cfg.sectors[k].group == "petroleum_products") fuel = k;
  }

  auto goods = [&] {
    std::vector<std::size_t> g;
    for (std::size_t k = 0; k < cfg.sectors.size(); ++k) {
      if (k != wt) g.push_back(k);
    }
    return g;
  }();
  auto tradable = [&](std::size_t k) {
    return cfg.assignment(k).carriage != Carriage::None;
  };

  // Production columns for ordinary sectors and final-demand columns.
  for (const auto& reg : cfg.regions) {
    const double gdp = 5.0e6 * reg.gdp_weight;  // $ million
    double factor_income = 0.0, taxes = 0.0;
    for (const std::size_t i : goods) {
      const auto& s = cfg.sectors[i];
      const double output = 2.0 * gdp * s.output_weight / weight_total * rng.uniform(0.8, 1.2);
      const double va = rng.uniform(0.35, 0.6);
      const double tau = rng.uniform(0.02, 0.08);
      const double alpha = rng.uniform(0.5, 0.7);
      const std::string col = act_label(reg.id, s.id);
      sam.at(lab_label(reg.id), col) = output * va * alpha;
      sam.at(cap_label(reg.id), col) = output * va * (1.0 - alpha);
      sam.at(gov_label(reg.id), col) = output * tau;
      factor_income += output * va;
      taxes += output * tau;
      std::vector<double> w;
      for (std::size_t k = 0; k < goods.size(); ++k) w.push_back(rng.uniform(0.5, 1.5));
      double wsum = 0.0;
      for (const double x : w) wsum += x;
      for (std::size_t k = 0; k < goods.size(); ++k) {
        sam.at(arm_label(reg.id, cfg.sectors[goods[k]].id), col) =
            output * (1.0 - va - tau) * w[k] / wsum;
      }
    }
    sam.at(hh_label(reg.id), lab_label(reg.id)) = sam.row_sum(lab_label(reg.id));
    sam.at(hh_label(reg.id), cap_label(reg.id)) = sam.row_sum(cap_label(reg.id));
    const double save = rng.uniform(0.15, 0.25);
    sam.at(inv_label(reg.id), hh_label(reg.id)) = factor_income * save;
    const std::array<std::pair<std::string, double>, 3> agents = {{
        {hh_label(reg.id), factor_income * (1.0 - save)},
        {gov_label(reg.id), taxes},
        {inv_label(reg.id), factor_income * save},
    }};
    for (const auto& [agent, budget] : agents) {
      std::vector<double> w;
      double wsum = 0.0;
      for (const std::size_t i : goods) {
        w.push_back(cfg.sectors[i].output_weight * rng.uniform(0.5, 1.5));
        wsum += w.back();
      }
      for (std::size_t k = 0; k < goods.size(); ++k) {
        sam.at(arm_label(reg.id, cfg.sectors[goods[k]].id), agent) = budget * w[k] / wsum;
      }
    }
  }

  // Route margin pattern: a symmetric distance factor per region pair.
  const std::size_t nr = cfg.regions.size();
  std::vector<double> distance(nr * nr, 1.0);
  for (std::size_t a = 0; a < nr; ++a) {
    for (std::size_t b = a + 1; b < nr; ++b) {
      distance[a * nr + b] = distance[b * nr + a] = rng.uniform(0.7, 1.3);
    }
  }
  auto pattern = [&](std::size_t s, std::size_t r, std::size_t i) {
    const double f = margin_factor ? margin_factor(s, r, i) : distance[s * nr + r];
    return detail::base_margin_rate(cfg.assignment(i)) * f;
  };

  // Armington columns: domestic purchases, imports at FOB, margins.
  double margin_total = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    const auto& rid = cfg.regions[r].id;
    for (const std::size_t i : goods) {
      const auto& sid = cfg.sectors[i].id;
      const std::string col = arm_label(rid, sid);
      const double demand = sam.row_sum(col);
      if (!tradable(i)) {
        sam.at(act_label(rid, sid), col) = demand;
        continue;
      }
      const double import_share = rng.uniform(0.15, 0.35);
      sam.at(act_label(rid, sid), col) = demand * (1.0 - import_share);
      double wsum = 0.0;
      std::vector<double> w(nr, 0.0);
      for (std::size_t s = 0; s < nr; ++s) {
        if (s == r) continue;
        w[s] = cfg.regions[s].gdp_weight * rng.uniform(0.5, 1.5);
        wsum += w[s];
      }
      double margins = 0.0;
      for (std::size_t s = 0; s < nr; ++s) {
        if (s == r) continue;
        const double cif = demand * import_share * w[s] / wsum;
        const double m = pattern(s, r, i);
        sam.at(act_label(cfg.regions[s].id, sid), col) = cif / (1.0 + m);
        margins += m * cif / (1.0 + m);
      }
      sam.at(kTransportPool, col) = margins;
      margin_total += margins;
    }
  }

  // Water transport: each region's carriers sell to the pool.
  for (const auto& reg : cfg.regions) {
    const double output = margin_total * reg.gdp_weight * rng.uniform(0.7, 1.3);
    const std::string col = act_label(reg.id, wt_id);
    sam.at(col, kTransportPool) = output;
    const double alpha = rng.uniform(0.4, 0.6);
    sam.at(lab_label(reg.id), col) = output * 0.45 * alpha;
    sam.at(cap_label(reg.id), col) = output * 0.45 * (1.0 - alpha);
    sam.at(gov_label(reg.id), col) = output * 0.03;
    if (fuel < cfg.sectors.size()) {
      sam.at(arm_label(reg.id, cfg.sectors[fuel].id), col) = output * 0.30;
      sam.at(arm_label(reg.id, cfg.sectors[goods.back()].id), col) += output * 0.22;
    } else {
      sam.at(arm_label(reg.id, cfg.sectors[goods.back()].id), col) = output * 0.52;
    }
  }

  balance_sam(sam);
  for (int round = 0; round < 200; ++round) {
    const double share = water_transport_va_share(cfg, sam);
    if (std::abs(share / cfg.water_transport_gdp_share - 1.0) < 1e-9) break;
    const double f = cfg.water_transport_gdp_share / share;
    const std::size_t pool = sam.index(kTransportPool);
    sam.flows.row(pool) *= f;
    balance_sam(sam);
  }

  // Split each composite's margin bill across origins by the route pattern.
  Economy econ{cfg, std::move(sam), {}};
  for (std::size_t r = 0; r < nr; ++r) {
    for (const std::size_t i : goods) {
      if (!tradable(i)) continue;
      const auto& sid = cfg.sectors[i].id;
      const std::string col = arm_label(cfg.regions[r].id, sid);
      double weighted = 0.0;
      for (std::size_t s = 0; s < nr; ++s) {
        if (s != r) weighted += pattern(s, r, i) * econ.sam.at(act_label(cfg.regions[s].id, sid), col);
      }
      const double scale = econ.sam.at(kTransportPool, col) / weighted;
      for (std::size_t s = 0; s < nr; ++s) {
        if (s == r) continue;
        econ.margins[RouteKey{cfg.regions[s].id, cfg.regions[r].id, sid}] = pattern(s, r, i) * scale;
      }
    }
  }
  return econ;
}

}  // namespace bwi::cge
