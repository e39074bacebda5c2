#pragma once

// Calibrated multi-region Armington equilibrium.
//
// Production: Leontief over value added and Armington composites, with an
// ad valorem output tax: (1 - tau) PY = a_va * PVA + sum_j a_int_j * PA_j.
// Value added is Cobb-Douglas in labour and capital.
// Demand for a traded good: CES(domestic, CES over origins at CIF prices).
// CIF price of origin s in r: (PY_s + m * PT) / (1 + m0), so a unit of
// import quantity costs 1 at the benchmark and the margin m is paid to a
// global transport pool, a Cobb-Douglas aggregate of regions' water
// transport output with price PT.
// Households spend (1 - save_rate) of factor income, government its tax
// revenue, investment the savings, each Cobb-Douglas over composites.
// Factors are immobile across regions and fully employed. The wage of the
// numeraire region is fixed and its labour market is the dropped equation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "bwi/cge/config.hpp"
#include "bwi/cge/sam.hpp"

namespace bwi::cge {

struct CgeModel {
  EconomyConfig config;
  std::size_t R = 0;
  std::size_t S = 0;
  std::size_t wt = 0;
  std::size_t numeraire = 0;
  double numeraire_price = 1.0;
  double sigma_top = 2.0;
  std::vector<double> sigma_m;  // per sector
  std::vector<bool> traded;     // per sector: any benchmark import flow

  // Per (r, i), index r * S + i.
  std::vector<double> y0, tau, a_va, alpha_l;
  std::vector<double> theta_d;     // domestic value share of the composite
  std::vector<double> composite0;  // benchmark composite quantity
  std::vector<double> imports0;    // benchmark import quantity (CIF)
  std::vector<double> share_c, share_g, share_v;
  // Per (r, j, i), index (r * S + j) * S + i: composite j per unit of i.
  std::vector<double> a_int;
  // Per route (s, r, i), index (s * R + r) * S + i.
  std::vector<double> fob0, margin0, beta;
  // Per region.
  std::vector<double> lbar, kbar, save_rate, theta_t;

  std::size_t ri(std::size_t r, std::size_t i) const { return r * S + i; }
  std::size_t route(std::size_t s, std::size_t r, std::size_t i) const { return (s * R + r) * S + i; }
  const std::string& region(std::size_t r) const { return config.regions[r].id; }
  const std::string& sector(std::size_t i) const { return config.sectors[i].id; }
  std::size_t unknowns() const { return 2 * R * S + 2 * R - 1; }
};

/// Reads share and scale parameters off a balanced SAM so that unit prices
/// and the SAM's flows are an equilibrium.
inline CgeModel calibrate(const Economy& econ) {
  const EconomyConfig& cfg = econ.config;
  cfg.validate();
  const Sam& sam = econ.sam;
  if (sam.labels != sam_accounts(cfg)) {
    throw CgeError(CgeErrorKind::InconsistentSam, "SAM accounts do not match the economy config");
  }
  if (sam.max_imbalance() > 1e-8) {
    throw CgeError(CgeErrorKind::InconsistentSam,
                   fmt::format("SAM is not balanced (imbalance {})", sam.max_imbalance()));
  }
  auto zero_nest = [](const std::string& what) {
    throw CgeError(CgeErrorKind::ZeroFlowNest, "zero benchmark flow: " + what);
  };

  CgeModel m;
  m.config = cfg;
  m.R = cfg.regions.size();
  m.S = cfg.sectors.size();
  m.wt = cfg.water_transport_index();
  m.numeraire = cfg.numeraire_index();
  m.numeraire_price = cfg.numeraire_price;
  m.sigma_top = cfg.top_sigma;
  const std::size_t R = m.R, S = m.S;
  for (const auto& s : cfg.sectors) m.sigma_m.push_back(s.armington_sigma);
  m.traded.assign(S, false);
  m.y0.assign(R * S, 0.0);
  m.tau = m.a_va = m.alpha_l = m.y0;
  m.theta_d.assign(R * S, 1.0);
  m.composite0 = m.imports0 = m.share_c = m.share_g = m.share_v = m.y0;
  m.a_int.assign(R * S * S, 0.0);
  m.fob0.assign(R * R * S, 0.0);
  m.margin0 = m.beta = m.fob0;
  m.lbar.assign(R, 0.0);
  m.kbar = m.save_rate = m.theta_t = m.lbar;

  double pool_total = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    pool_total += sam.at(act_label(m.region(r), m.sector(m.wt)), kTransportPool);
  }

  for (std::size_t r = 0; r < R; ++r) {
    const auto& rid = m.region(r);
    for (std::size_t i = 0; i < S; ++i) {
      const std::string act = act_label(rid, m.sector(i));
      const double y = sam.row_sum(act);
      if (!(y > 0.0)) zero_nest("output of " + act);
      const double lab = sam.at(lab_label(rid), act);
      const double cap = sam.at(cap_label(rid), act);
      if (!(lab + cap > 0.0)) zero_nest("value added of " + act);
      m.y0[m.ri(r, i)] = y;
      m.tau[m.ri(r, i)] = sam.at(gov_label(rid), act) / y;
      m.a_va[m.ri(r, i)] = (lab + cap) / y;
      m.alpha_l[m.ri(r, i)] = lab / (lab + cap);
      for (std::size_t j = 0; j < S; ++j) {
        if (j == m.wt) continue;
        m.a_int[m.ri(r, j) * S + i] = sam.at(arm_label(rid, m.sector(j)), act) / y;
      }
    }
    m.theta_t[r] = pool_total > 0.0
                       ? sam.at(act_label(rid, m.sector(m.wt)), kTransportPool) / pool_total
                       : 0.0;
    m.lbar[r] = sam.row_sum(lab_label(rid));
    m.kbar[r] = sam.row_sum(cap_label(rid));
    const double income = m.lbar[r] + m.kbar[r];
    const double savings = sam.at(inv_label(rid), hh_label(rid));
    m.save_rate[r] = savings / income;
    const double consumption = sam.col_sum(hh_label(rid)) - savings;
    if (!(consumption > 0.0)) zero_nest("household consumption in " + rid);
    const double gov = sam.col_sum(gov_label(rid));
    const double inv = sam.col_sum(inv_label(rid));
    for (std::size_t i = 0; i < S; ++i) {
      if (i == m.wt) continue;
      const std::string arm = arm_label(rid, m.sector(i));
      m.share_c[m.ri(r, i)] = sam.at(arm, hh_label(rid)) / consumption;
      m.share_g[m.ri(r, i)] = gov > 0.0 ? sam.at(arm, gov_label(rid)) / gov : 0.0;
      m.share_v[m.ri(r, i)] = inv > 0.0 ? sam.at(arm, inv_label(rid)) / inv : 0.0;
    }
  }

  for (std::size_t r = 0; r < R; ++r) {
    const auto& rid = m.region(r);
    for (std::size_t i = 0; i < S; ++i) {
      if (i == m.wt) continue;
      const std::string arm = arm_label(rid, m.sector(i));
      const double total = sam.col_sum(arm);
      if (!(total > 0.0)) zero_nest("composite " + arm);
      const double margins_paid = sam.at(kTransportPool, arm);
      double imports = 0.0, margins_routed = 0.0;
      for (std::size_t s = 0; s < R; ++s) {
        if (s == r) continue;
        const double fob = sam.at(act_label(m.region(s), m.sector(i)), arm);
        if (fob <= 0.0) continue;
        const auto it = econ.margins.find(RouteKey{m.region(s), rid, m.sector(i)});
        const double rate = it == econ.margins.end() ? 0.0 : it->second;
        const std::size_t k = m.route(s, r, i);
        m.fob0[k] = fob;
        m.margin0[k] = rate;
        imports += fob * (1.0 + rate);
        margins_routed += fob * rate;
      }
      if (std::abs(margins_routed - margins_paid) > 1e-8 * std::max(1.0, margins_paid)) {
        throw CgeError(CgeErrorKind::InconsistentSam,
                       fmt::format("route margins into {} sum to {} but the SAM records {}", arm,
                                   margins_routed, margins_paid));
      }
      m.composite0[m.ri(r, i)] = total;
      m.imports0[m.ri(r, i)] = imports;
      m.theta_d[m.ri(r, i)] = sam.at(act_label(rid, m.sector(i)), arm) / total;
      if (imports > 0.0) {
        m.traded[i] = true;
        for (std::size_t s = 0; s < R; ++s) {
          const std::size_t k = m.route(s, r, i);
          m.beta[k] = m.fob0[k] * (1.0 + m.margin0[k]) / imports;
        }
      }
    }
  }
  return m;
}

/// Current-margin rates per route; starts from the benchmark rates.
inline std::vector<double> benchmark_margins(const CgeModel& m) { return m.margin0; }

struct Equilibrium {
  // Per (r, i).
  std::vector<double> py, pa, pm, y, domestic, composite, imports;
  std::vector<double> consumption, government, investment;
  // Per region.
  std::vector<double> wage, rental, factor_income, tax_revenue, hh_budget, utility;
  double pt = 1.0;
  double transport_demand = 0.0;
  // Per route (s, r, i).
  std::vector<double> margin_rate;
  std::vector<double> quantity;  // import quantity, CIF units
  std::vector<double> exports;   // export quantity, FOB units
  std::vector<double> fob_value, cif_value, margin_value;

  int iterations = 0;
  double residual_norm = 0.0;
  double walras_residual = 0.0;  // numeraire-market excess demand / world GDP
};

namespace detail {

inline double ces_price(double s1, double p1, double s2, double p2, double sigma) {
  if (s2 <= 0.0) return p1;
  if (s1 <= 0.0) return p2;
  if (std::abs(sigma - 1.0) < 1e-12) return std::pow(p1, s1) * std::pow(p2, s2);
  const double e = 1.0 - sigma;
  return std::pow(s1 * std::pow(p1, e) + s2 * std::pow(p2, e), 1.0 / e);
}

/// Fills `e` from the unknowns and returns the scaled residual vector.
inline Eigen::VectorXd evaluate(const CgeModel& m, const std::vector<double>& margins,
                                const Eigen::VectorXd& x, Equilibrium& e) {
  const std::size_t R = m.R, S = m.S, RS = R * S;
  e.py.resize(RS);
  e.y.resize(RS);
  e.wage.resize(R);
  e.rental.resize(R);
  for (std::size_t k = 0; k < RS; ++k) {
    e.py[k] = std::exp(x[k]);
    e.y[k] = std::exp(x[RS + k]);
  }
  std::size_t pos = 2 * RS;
  for (std::size_t r = 0; r < R; ++r) {
    e.wage[r] = r == m.numeraire ? m.numeraire_price : std::exp(x[pos++]);
  }
  for (std::size_t r = 0; r < R; ++r) e.rental[r] = std::exp(x[pos++]);

  e.margin_rate = margins;
  double log_pt = 0.0;
  for (std::size_t r = 0; r < R; ++r) log_pt += m.theta_t[r] * std::log(e.py[m.ri(r, m.wt)]);
  e.pt = std::exp(log_pt);

  // Prices.
  std::vector<double> pcif(R * R * S, 0.0);
  e.pm.assign(RS, 0.0);
  e.pa.assign(RS, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = m.ri(r, i);
      if (m.imports0[k] > 0.0) {
        const double sigma = m.sigma_m[i];
        double acc = 0.0;
        for (std::size_t s = 0; s < R; ++s) {
          const std::size_t q = m.route(s, r, i);
          if (m.beta[q] <= 0.0) continue;
          pcif[q] = (e.py[m.ri(s, i)] + margins[q] * e.pt) / (1.0 + m.margin0[q]);
          acc += std::abs(sigma - 1.0) < 1e-12 ? m.beta[q] * std::log(pcif[q])
                                               : m.beta[q] * std::pow(pcif[q], 1.0 - sigma);
        }
        e.pm[k] = std::abs(sigma - 1.0) < 1e-12 ? std::exp(acc)
                                                : std::pow(acc, 1.0 / (1.0 - sigma));
      }
      e.pa[k] = ces_price(m.theta_d[k], e.py[k], 1.0 - m.theta_d[k], e.pm[k], m.sigma_top);
    }
  }

  Eigen::VectorXd f(static_cast<Eigen::Index>(m.unknowns()));

  // Zero profit, and factor demands per unit of output.
  std::vector<double> labour(R, 0.0), capital(R, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = m.ri(r, i);
      const double al = m.alpha_l[k];
      const double pva = std::pow(e.wage[r], al) * std::pow(e.rental[r], 1.0 - al);
      double cost = m.a_va[k] * pva;
      for (std::size_t j = 0; j < S; ++j) {
        if (j != m.wt) cost += m.a_int[m.ri(r, j) * S + i] * e.pa[m.ri(r, j)];
      }
      f[k] = 1.0 - m.tau[k] - cost / e.py[k];
      labour[r] += m.a_va[k] * e.y[k] * al * pva / e.wage[r];
      capital[r] += m.a_va[k] * e.y[k] * (1.0 - al) * pva / e.rental[r];
    }
  }

  // Incomes and final demand.
  e.factor_income.resize(R);
  e.tax_revenue.assign(R, 0.0);
  e.hh_budget.resize(R);
  e.consumption.assign(RS, 0.0);
  e.government.assign(RS, 0.0);
  e.investment.assign(RS, 0.0);
  e.composite.assign(RS, 0.0);
  e.domestic.assign(RS, 0.0);
  e.imports.assign(RS, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    e.factor_income[r] = e.wage[r] * m.lbar[r] + e.rental[r] * m.kbar[r];
    for (std::size_t i = 0; i < S; ++i) {
      e.tax_revenue[r] += m.tau[m.ri(r, i)] * e.py[m.ri(r, i)] * e.y[m.ri(r, i)];
    }
    e.hh_budget[r] = (1.0 - m.save_rate[r]) * e.factor_income[r];
    const double savings = m.save_rate[r] * e.factor_income[r];
    for (std::size_t j = 0; j < S; ++j) {
      if (j == m.wt) continue;
      const std::size_t k = m.ri(r, j);
      e.consumption[k] = m.share_c[k] * e.hh_budget[r] / e.pa[k];
      e.government[k] = m.share_g[k] * e.tax_revenue[r] / e.pa[k];
      e.investment[k] = m.share_v[k] * savings / e.pa[k];
      double a = e.consumption[k] + e.government[k] + e.investment[k];
      for (std::size_t i = 0; i < S; ++i) a += m.a_int[k * S + i] * e.y[m.ri(r, i)];
      e.composite[k] = a;
      const double td = m.theta_d[k];
      e.domestic[k] = td >= 1.0 ? a : td * a * std::pow(e.pa[k] / e.py[k], m.sigma_top);
      e.imports[k] = td >= 1.0 ? 0.0
                               : (1.0 - td) * a * std::pow(e.pa[k] / e.pm[k], m.sigma_top);
    }
  }

  // Bilateral flows and the transport pool.
  e.quantity.assign(R * R * S, 0.0);
  e.exports.assign(R * R * S, 0.0);
  e.fob_value.assign(R * R * S, 0.0);
  e.cif_value.assign(R * R * S, 0.0);
  e.margin_value.assign(R * R * S, 0.0);
  std::vector<double> export_total(RS, 0.0);
  e.transport_demand = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = m.ri(r, i);
      if (e.imports[k] <= 0.0) continue;
      for (std::size_t s = 0; s < R; ++s) {
        const std::size_t q = m.route(s, r, i);
        if (m.beta[q] <= 0.0) continue;
        const double qty = m.beta[q] * e.imports[k] * std::pow(e.pm[k] / pcif[q], m.sigma_m[i]);
        const double x_fob = qty / (1.0 + m.margin0[q]);
        e.quantity[q] = qty;
        e.exports[q] = x_fob;
        e.fob_value[q] = e.py[m.ri(s, i)] * x_fob;
        e.cif_value[q] = pcif[q] * qty;
        e.margin_value[q] = margins[q] * e.pt * x_fob;
        export_total[m.ri(s, i)] += x_fob;
        e.transport_demand += margins[q] * x_fob;
      }
    }
  }

  // Output market clearing, scaled by benchmark output.
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t i = 0; i < S; ++i) {
      const std::size_t k = m.ri(r, i);
      const double demand = i == m.wt ? m.theta_t[r] * e.pt * e.transport_demand / e.py[k]
                                      : e.domestic[k] + export_total[k];
      f[RS + k] = (e.y[k] - demand) / m.y0[k];
    }
  }

  // Factor markets; the numeraire region's labour market is implied.
  pos = 2 * RS;
  double world_income = 0.0;
  for (std::size_t r = 0; r < R; ++r) world_income += e.factor_income[r];
  for (std::size_t r = 0; r < R; ++r) {
    if (r == m.numeraire) {
      e.walras_residual = e.wage[r] * (labour[r] - m.lbar[r]) / world_income;
      continue;
    }
    f[pos++] = (labour[r] - m.lbar[r]) / m.lbar[r];
  }
  for (std::size_t r = 0; r < R; ++r) f[pos++] = (capital[r] - m.kbar[r]) / m.kbar[r];

  e.utility.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    double log_u = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      const std::size_t k = m.ri(r, j);
      if (m.share_c[k] > 0.0) log_u += m.share_c[k] * std::log(e.consumption[k] / m.share_c[k]);
    }
    e.utility[r] = std::exp(log_u);
  }
  return f;
}

}  // namespace detail

/// Unknowns at the benchmark: unit prices scaled by the numeraire price,
/// benchmark outputs.
inline Eigen::VectorXd benchmark_point(const CgeModel& m) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(m.unknowns()));
  const std::size_t RS = m.R * m.S;
  const double lp = std::log(m.numeraire_price);
  for (std::size_t k = 0; k < RS; ++k) {
    x[k] = lp;
    x[RS + k] = std::log(m.y0[k]);
  }
  for (std::size_t k = 2 * RS; k < m.unknowns(); ++k) x[k] = lp;
  return x;
}

/// Damped Newton on the scaled residuals in log variables, finite-difference
/// Jacobian, backtracking on the residual 2-norm.
inline Equilibrium solve(const CgeModel& m, const std::vector<double>& margins) {
  if (margins.size() != m.margin0.size()) {
    throw CgeError(CgeErrorKind::InvalidConfig, "margin vector does not match the model");
  }
  const auto& opt = m.config.solver;
  Eigen::VectorXd x = benchmark_point(m);
  Equilibrium e;
  Eigen::VectorXd f = detail::evaluate(m, margins, x, e);
  const Eigen::Index n = x.size();
  Eigen::MatrixXd jac(n, n);
  Equilibrium scratch;
  int iter = 0;
  while (!(f.lpNorm<Eigen::Infinity>() < opt.tolerance)) {
    if (iter >= opt.max_iterations || !f.allFinite()) {
      throw CgeError(CgeErrorKind::NoConvergence,
                     fmt::format("no convergence after {} iterations (residual {})", iter,
                                 f.lpNorm<Eigen::Infinity>()),
                     ErrorCategory::Solver);
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::VectorXd xp = x;
      xp[c] += opt.fd_step;
      jac.col(c) = (detail::evaluate(m, margins, xp, scratch) - f) / opt.fd_step;
    }
    const Eigen::VectorXd dx = jac.partialPivLu().solve(-f);
    const double norm0 = f.norm();
    double lambda = 1.0;
    while (true) {
      const Eigen::VectorXd xt = x + lambda * dx;
      Eigen::VectorXd ft = detail::evaluate(m, margins, xt, scratch);
      if (ft.allFinite() && ft.norm() <= (1.0 - 1e-4 * lambda) * norm0) {
        x = xt;
        f = std::move(ft);
        break;
      }
      lambda *= 0.5;
      if (lambda < 1e-10) {
        throw CgeError(CgeErrorKind::NoConvergence,
                       fmt::format("line search failed at iteration {} (residual {})", iter,
                                   f.lpNorm<Eigen::Infinity>()),
                       ErrorCategory::Solver);
      }
    }
    ++iter;
  }
  f = detail::evaluate(m, margins, x, e);
  e.iterations = iter;
  e.residual_norm = f.lpNorm<Eigen::Infinity>();
  for (const auto* v : {&e.py, &e.pa, &e.wage, &e.rental}) {
    for (const double p : *v) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw CgeError(CgeErrorKind::NonPositivePrice, "equilibrium has a non-positive price",
                       ErrorCategory::Solver);
      }
    }
  }
  return e;
}

}  // namespace bwi::cge
