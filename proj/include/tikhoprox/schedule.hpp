#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tikhoprox/core.hpp"

namespace tikhoprox {

// Rescaling schedules beta(t). Two closed-form families plus tabulated data:
//   PolyLog:  scale * t^m * ln(t)^p          m >= 0, p >= 0, (m,p) != (0,0)
//   ExpPower: scale * t^m * exp(gamma t^r)   m >= 0, gamma > 0, r in (0,1]
//   Table:    linear interpolation of values given on the integer grid k0, k0+1, ...
// The same object serves the continuous flow (beta_at/beta_dot/beta_ddot) and
// the discrete iteration (beta_k = beta_at(k) bit for bit, beta_dot_k the
// forward difference).
struct BetaSchedule {
  enum class Kind { PolyLog, ExpPower, Table };

  Kind kind = Kind::PolyLog;
  double m = 0.0, p = 0.0;      // PolyLog exponents
  double gamma = 0.0, r = 1.0;  // ExpPower parameters
  double scale = 1.0;
  double t0 = 2.0;  // start of the domain; doubles as k0 for iterations
  std::vector<double> table;  // Table: table[i] = beta(t0 + i)

  std::int64_t k0() const { return std::int64_t(std::llround(t0)); }

  void require(double t) const {
    double hi = kind == Kind::Table ? t0 + double(table.size() - 1) : kInf;
    if (!(t >= t0 * (1.0 - 1e-12)) || !(t <= hi * (1.0 + 1e-12)))
      throw DomainError("schedule evaluated at t=" + std::to_string(t) +
                        " outside [" + std::to_string(t0) + ", " +
                        (kind == Kind::Table ? std::to_string(hi) : "inf") +
                        "]");
  }

  double beta_at(double t) const {
    require(t);
    switch (kind) {
      case Kind::PolyLog:
        return scale * std::pow(t, m) * std::pow(std::log(t), p);
      case Kind::ExpPower:
        return scale * std::pow(t, m) * std::exp(gamma * std::pow(t, r));
      case Kind::Table: {
        double s = std::clamp(t - t0, 0.0, double(table.size() - 1));
        auto i = std::min(std::size_t(s), table.size() - 2);
        if (table.size() == 1) return table[0];
        return table[i] + (s - double(i)) * (table[i + 1] - table[i]);
      }
    }
    return kNaN;
  }

  // d/dt log beta, in closed form so it stays finite where beta overflows.
  double beta_dot_over_beta(double t) const {
    require(t);
    switch (kind) {
      case Kind::PolyLog:
        return m / t + p / (t * std::log(t));
      case Kind::ExpPower:
        return m / t + gamma * r * std::pow(t, r - 1.0);
      case Kind::Table:
        return table_slope(t) / beta_at(t);
    }
    return kNaN;
  }

  double beta_dot(double t) const {
    require(t);
    switch (kind) {
      case Kind::PolyLog: {
        double L = std::log(t);
        return scale * std::pow(t, m - 1.0) * std::pow(L, p - 1.0) *
               (m * L + p);
      }
      case Kind::ExpPower: {
        return scale * std::pow(t, m - 1.0) *
               std::exp(gamma * std::pow(t, r)) *
               (m + r * gamma * std::pow(t, r));
      }
      case Kind::Table:
        return table_slope(t);
    }
    return kNaN;
  }

  // beta_ddot / beta_dot in closed form (see beta_dot_over_beta).
  double beta_ddot_over_dot(double t) const {
    require(t);
    switch (kind) {
      case Kind::PolyLog: {
        double L = std::log(t);
        return (m * (m - 1.0) * L * L + (2.0 * m - 1.0) * p * L +
                p * (p - 1.0)) /
               (t * L * (m * L + p));
      }
      case Kind::ExpPower: {
        double u = r * gamma * std::pow(t, r);
        return (m * (m - 1.0) + (2.0 * m + r - 1.0) * u + u * u) /
               (t * (m + u));
      }
      case Kind::Table:
        return 0.0;
    }
    return kNaN;
  }

  double beta_ddot(double t) const {
    require(t);
    switch (kind) {
      case Kind::PolyLog: {
        double L = std::log(t);
        return scale * std::pow(t, m - 2.0) * std::pow(L, p - 2.0) *
               (m * (m - 1.0) * L * L + (2.0 * m - 1.0) * p * L +
                p * (p - 1.0));
      }
      case Kind::ExpPower: {
        double u = r * gamma * std::pow(t, r);
        return scale * std::pow(t, m - 2.0) *
               std::exp(gamma * std::pow(t, r)) *
               (m * (m - 1.0) + (2.0 * m + r - 1.0) * u + u * u);
      }
      case Kind::Table:
        return 0.0;
    }
    return kNaN;
  }

  double beta_k(std::int64_t k) const { return beta_at(double(k)); }

  double beta_dot_k(std::int64_t k) const {
    return beta_k(k + 1) - beta_k(k);
  }

  // log beta(k+1) - log beta(k) without forming beta. Direct log differences
  // cancel catastrophically once k is large (at k ~ 1e13 the difference is
  // ~1e-13 against log values ~1e2), so each family gets a log1p/expm1 form
  // that is exact to ulp of the difference itself.
  double log_ratio_k(std::int64_t k) const {
    double kk = double(k);
    require(kk);
    switch (kind) {
      case Kind::PolyLog: {
        double dlnt = std::log1p(1.0 / kk);
        double extra = p == 0.0 ? 0.0 : p * std::log1p(dlnt / std::log(kk));
        return m * dlnt + extra;
      }
      case Kind::ExpPower: {
        double dlnt = std::log1p(1.0 / kk);
        // gamma ((k+1)^r - k^r) = gamma k^r expm1(r log1p(1/k))
        return m * dlnt + gamma * std::pow(kk, r) * std::expm1(r * dlnt);
      }
      case Kind::Table: {
        double b0 = beta_k(k), b1 = beta_k(k + 1);
        if (!(b0 > 0.0)) throw DomainError("table schedule must be positive");
        return std::log1p((b1 - b0) / b0);
      }
    }
    return kNaN;
  }

 private:
  double table_slope(double t) const {
    if (table.size() < 2) return 0.0;
    double s = std::clamp(t - t0, 0.0, double(table.size() - 1));
    auto i = std::min(std::size_t(s), table.size() - 2);
    return table[i + 1] - table[i];
  }
};

inline BetaSchedule polylog_schedule(double m, double p, double scale = 1.0,
                                     double t0 = 2.0) {
  if (!(m >= 0.0) || !(p >= 0.0) || (m == 0.0 && p == 0.0))
    throw ConfigError("polylog schedule needs m >= 0, p >= 0, (m,p) != (0,0)");
  if (!(scale > 0.0)) throw ConfigError("schedule scale must be > 0");
  if (!(t0 >= 2.0)) throw ConfigError("schedule t0 must be >= 2");
  BetaSchedule s;
  s.kind = BetaSchedule::Kind::PolyLog;
  s.m = m;
  s.p = p;
  s.scale = scale;
  s.t0 = t0;
  return s;
}

inline BetaSchedule exppow_schedule(double m, double gamma, double r,
                                    double scale = 1.0, double t0 = 2.0) {
  if (!(m >= 0.0) || !(gamma > 0.0) || !(r > 0.0) || !(r <= 1.0))
    throw ConfigError("exppow schedule needs m >= 0, gamma > 0, r in (0, 1]");
  if (!(scale > 0.0)) throw ConfigError("schedule scale must be > 0");
  if (!(t0 >= 2.0)) throw ConfigError("schedule t0 must be >= 2");
  BetaSchedule s;
  s.kind = BetaSchedule::Kind::ExpPower;
  s.m = m;
  s.gamma = gamma;
  s.r = r;
  s.scale = scale;
  s.t0 = t0;
  return s;
}

inline BetaSchedule table_schedule(std::vector<double> values, double k0 = 2.0) {
  if (values.empty()) throw ConfigError("table schedule needs values");
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError("table schedule values must be positive and finite");
  if (!(k0 >= 2.0)) throw ConfigError("schedule t0 must be >= 2");
  BetaSchedule s;
  s.kind = BetaSchedule::Kind::Table;
  s.t0 = k0;
  s.table = std::move(values);
  return s;
}

inline std::string schedule_id(const BetaSchedule& s) {
  std::ostringstream o;
  switch (s.kind) {
    case BetaSchedule::Kind::PolyLog:
      o << "polylog:m=" << s.m << ",q=" << s.p;
      break;
    case BetaSchedule::Kind::ExpPower:
      o << "exppow:m=" << s.m << ",gamma=" << s.gamma << ",r=" << s.r;
      break;
    case BetaSchedule::Kind::Table:
      o << "table[n=" << s.table.size() << "]";
      break;
  }
  if (s.scale != 1.0) o << ",scale=" << s.scale;
  return o.str();
}

// Parses "polylog:m=3,q=3", "exppow:m=3,gamma=2,r=0.8", "table:<path>".
// Optional keys scale= and t0= on the closed-form kinds; q and p are synonyms.
inline BetaSchedule parse_schedule(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (head == "table") {
    if (rest.empty()) throw ConfigError("table schedule needs a file path");
    std::ifstream in(rest);
    if (!in) throw ConfigError("cannot open schedule table '" + rest + "'");
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
      auto start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(line.substr(start), &pos);
      } catch (const std::exception&) {
        throw ConfigError("bad value in schedule table '" + rest + "': " + line);
      }
      vals.push_back(v);
    }
    return table_schedule(std::move(vals));
  }
  if (head != "polylog" && head != "exppow")
    throw ConfigError("unknown schedule kind '" + head + "'");

  double m = 0, p = 0, gamma = 0, r = 1, scale = 1, t0 = 2;
  std::istringstream items(rest);
  std::string item;
  while (std::getline(items, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError("schedule spec item '" + item + "' is not key=value");
    std::string key = item.substr(0, eq);
    double val;
    try {
      val = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("schedule spec item '" + item + "' has a bad number");
    }
    if (key == "m") m = val;
    else if (key == "p" || key == "q") p = val;
    else if (key == "gamma") gamma = val;
    else if (key == "r") r = val;
    else if (key == "scale") scale = val;
    else if (key == "t0" || key == "k0") t0 = val;
    else throw ConfigError("unknown schedule key '" + key + "'");
  }
  return head == "polylog" ? polylog_schedule(m, p, scale, t0)
                           : exppow_schedule(m, gamma, r, scale, t0);
}

// Result of checking the growth hypotheses on a schedule. The continuous
// check fills the margin/sup fields, the discrete check the ratio limits;
// the report prints whichever fields are populated.
struct HypothesisReport {
  std::string schedule;
  double c = kNaN, mu = kNaN;
  double t_lo = kNaN, t_hi = kNaN;
  std::int64_t k_max = 0;

  bool growth_ok = true;        // beta_dot > 0 on the checked range
  bool margin_ok = false;       // max(beta_dot/beta, 1) <= c - mu
  double margin = kNaN;         // min over grid of (c - mu) - max(beta_dot/beta, 1)
  bool quotient_ok = false;     // (1 + bdot/b) / (mu + bddot/bdot - bdot/b) bounded
  double quotient_sup = kNaN;   // running sup over the grid tail
  int guarded_points = 0;       // |denominator| < 1e-14, excluded from the sup

  double ell_beta = kNaN;       // lim beta_{k+1}/beta_k (tail average)
  double ell_betadot = kNaN;    // lim beta_dot_{k+1}/beta_dot_k
  bool strong_convergence_regime = false;  // both limits within 1e-3 of 1

  bool continuous_ok() const { return growth_ok && margin_ok && quotient_ok; }
  bool discrete_ok() const {
    return growth_ok && std::isfinite(ell_beta) && ell_beta > 0.0 &&
           std::isfinite(ell_betadot) && ell_betadot > 0.0;
  }
};

// Continuous hypotheses on a caller-supplied grid: positivity of beta_dot,
// the margin max(beta_dot/beta, 1) <= c - mu, and boundedness of the quotient
// (1 + beta_dot/beta) / (mu + beta_ddot/beta_dot - beta_dot/beta). All three
// use the log-derivative closed forms, so overflow of beta itself is harmless.
inline HypothesisReport check_h_beta(const BetaSchedule& s, double c, double mu,
                                     const std::vector<double>& t_grid) {
  if (!(mu > 0.0) || !(c > mu))
    throw ConfigError("check_h_beta needs 0 < mu < c");
  if (t_grid.size() < 2) throw ConfigError("check_h_beta needs a grid");
  HypothesisReport rep;
  rep.schedule = schedule_id(s);
  rep.c = c;
  rep.mu = mu;
  rep.t_lo = t_grid.front();
  rep.t_hi = t_grid.back();

  double worst_margin = kInf;
  double sup = -kInf;
  bool diverging = false;
  // For the divergence probe: sup over the final tenth of the grid vs the
  // sup over the rest. A bounded quotient has ratio <= 1 + o(1).
  double sup_head = -kInf, sup_tail = -kInf;
  std::size_t tail_start = t_grid.size() - std::max<std::size_t>(1, t_grid.size() / 10);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    double t = t_grid[i];
    double a = s.beta_dot_over_beta(t);
    if (!(a > 0.0) && s.beta_dot(t) <= 0.0) rep.growth_ok = false;
    worst_margin = std::min(worst_margin, (c - mu) - std::max(a, 1.0));
    double denom = mu + s.beta_ddot_over_dot(t) - a;
    if (std::abs(denom) < 1e-14) {
      ++rep.guarded_points;
      continue;
    }
    if (denom < 0.0) {
      diverging = true;  // the damping budget is exhausted at this t
      continue;
    }
    double q = (1.0 + a) / denom;
    sup = std::max(sup, q);
    double& bucket = i >= tail_start ? sup_tail : sup_head;
    bucket = std::max(bucket, q);
  }
  rep.margin = worst_margin;
  rep.margin_ok = worst_margin >= -1e-12;
  rep.quotient_sup = sup;
  bool grew = std::isfinite(sup_head) && std::isfinite(sup_tail) &&
              sup_tail > 1.5 * std::max(sup_head, 1e-300);
  rep.quotient_ok = !diverging && std::isfinite(sup) && !grew;
  return rep;
}

// Discrete ratio limits over the last decade [k_max/10, k_max]. Closed-form
// schedules are sampled (up to 1000 points); tables are walked exactly. The
// beta_dot ratio comes from the identity
//   (beta_{k+1} - beta_k) / (beta_k - beta_{k-1}) = expm1(D_k) / (-expm1(-D_{k-1}))
// with D_k = log beta(k+1) - log beta(k), which survives k ~ 1e13 intact.
inline HypothesisReport check_h_beta_k(const BetaSchedule& s,
                                       std::int64_t k_max) {
  HypothesisReport rep;
  rep.schedule = schedule_id(s);
  rep.k_max = k_max;
  std::int64_t k_first = s.k0() + 1;
  std::int64_t k_last = k_max - 1;
  if (s.kind == BetaSchedule::Kind::Table)
    k_last = std::min(k_last, s.k0() + std::int64_t(s.table.size()) - 2);
  if (k_last < k_first)
    throw ConfigError("check_h_beta_k: horizon too short for this schedule");
  std::int64_t lo = std::max(k_first, k_max / 10);

  std::vector<std::int64_t> ks;
  const std::int64_t span = k_last - lo;
  const std::int64_t n_samples = 1000;
  if (span <= n_samples) {
    for (std::int64_t k = lo; k <= k_last; ++k) ks.push_back(k);
  } else {
    for (std::int64_t i = 0; i < n_samples; ++i)
      ks.push_back(lo + (span * i) / (n_samples - 1));
  }

  double sum_b = 0.0, sum_bd = 0.0;
  std::int64_t n_b = 0, n_bd = 0;
  for (std::int64_t k : ks) {
    double d_prev = s.log_ratio_k(k - 1);
    double d_cur = s.log_ratio_k(k);
    if (!(d_cur > 0.0) || !(d_prev > 0.0)) {
      rep.growth_ok = false;
      continue;
    }
    sum_b += std::exp(d_cur);
    ++n_b;
    double denom = -std::expm1(-d_prev);
    if (denom > 0.0) {
      sum_bd += std::expm1(d_cur) / denom;
      ++n_bd;
    }
  }
  if (n_b > 0) rep.ell_beta = sum_b / double(n_b);
  if (n_bd > 0) rep.ell_betadot = sum_bd / double(n_bd);
  rep.strong_convergence_regime = std::abs(rep.ell_beta - 1.0) <= 1e-3 &&
                                  std::abs(rep.ell_betadot - 1.0) <= 1e-3;
  return rep;
}

}  // namespace tikhoprox
