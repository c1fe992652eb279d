#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"
#include "tikhoprox/schedule.hpp"
#include "tikhoprox/solver.hpp"

namespace tikhoprox {

struct FitResult {
  double slope = kNaN;
  double intercept = kNaN;
  double r_squared = kNaN;
  int used = 0;
  int dropped = 0;  // non-positive or non-finite pairs in the tail
};

// Least squares line through (ln x, ln y) over the trailing tail_fraction of
// the series. Inputs are mean-centered before the normal equations, which is
// what makes the fit invariant under rescaling of either axis.
inline FitResult fit_loglog(const std::vector<double>& xs,
                            const std::vector<double>& ys,
                            double tail_fraction = 0.5) {
  if (xs.size() != ys.size() || xs.size() < 20)
    throw ConfigError("fit_loglog: series must have equal length >= 20");
  if (!(tail_fraction > 0.0) || !(tail_fraction <= 1.0))
    throw ConfigError("fit_loglog: tail_fraction in (0, 1]");
  std::size_t n = xs.size();
  std::size_t start = n - std::size_t(std::ceil(tail_fraction * double(n)));

  std::vector<double> lx, ly;
  FitResult fit;
  for (std::size_t i = start; i < n; ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) &&
        std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    } else {
      ++fit.dropped;
    }
  }
  fit.used = int(lx.size());
  if (lx.size() < 2) return fit;  // slope stays NaN; caller decides

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(lx.size());
  my /= double(lx.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    double dx = lx[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

struct RateReport {
  std::string series;
  std::string model;  // "vs_beta", "vs_poly", "vs_exp"
  double claimed = kNaN;
  double fitted_slope = kNaN;
  double r_squared = kNaN;
  double band = kNaN;  // max/median of y x^-claimed (resp. y e^{rho k}) over the tail
  double tail_fraction = 0.5;
  int used = 0;
  int dropped = 0;
  std::string verdict;  // "pass", "fail", "inconclusive"

  std::string to_text() const {
    std::ostringstream o;
    o << "series = " << series << "\n"
      << "model = " << model << "\n"
      << "claimed = " << claimed << "\n"
      << "fitted_slope = " << fitted_slope << "\n"
      << "r_squared = " << r_squared << "\n"
      << "band = " << band << "\n"
      << "tail_fraction = " << tail_fraction << "\n"
      << "used = " << used << "\n"
      << "dropped = " << dropped << "\n"
      << "verdict = " << verdict << "\n";
    return o.str();
  }
};

namespace detail {

inline double max_over_median(std::vector<double> v) {
  std::erase_if(v, [](double a) { return !std::isfinite(a); });
  if (v.empty()) return kNaN;
  double mx = *std::max_element(v.begin(), v.end());
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  double med = v[v.size() / 2];
  if (v.size() % 2 == 0) {
    double lo = *std::max_element(v.begin(), v.begin() + v.size() / 2);
    med = 0.5 * (med + lo);
  }
  return med > 0.0 ? mx / med : kInf;
}

}  // namespace detail

// Verdict policy: pass when the fitted slope is within slope_tol of the
// claim, the tail band max/median of y/x^claimed is <= band_max, and fewer
// than 10% of the tail was dropped; inconclusive when fewer than 10 usable
// points survive.
inline RateReport assess_power_rate(const std::string& series_name,
                                    const std::string& model,
                                    const std::vector<double>& xs,
                                    const std::vector<double>& ys,
                                    double claimed, double tail_fraction = 0.5,
                                    double slope_tol = 0.2,
                                    double band_max = 10.0) {
  RateReport rep;
  rep.series = series_name;
  rep.model = model;
  rep.claimed = claimed;
  rep.tail_fraction = tail_fraction;
  FitResult fit = fit_loglog(xs, ys, tail_fraction);
  rep.fitted_slope = fit.slope;
  rep.r_squared = fit.r_squared;
  rep.used = fit.used;
  rep.dropped = fit.dropped;

  std::size_t n = xs.size();
  std::size_t start = n - std::size_t(std::ceil(tail_fraction * double(n)));
  std::vector<double> prod;
  for (std::size_t i = start; i < n; ++i)
    if (xs[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i]))
      prod.push_back(ys[i] * std::pow(xs[i], -claimed));
  rep.band = detail::max_over_median(prod);

  if (fit.used < 10) {
    rep.verdict = "inconclusive";
    return rep;
  }
  bool ok = std::abs(fit.slope - claimed) <= slope_tol &&
            std::isfinite(rep.band) && rep.band <= band_max &&
            fit.dropped * 10 < (fit.used + fit.dropped);
  rep.verdict = ok ? "pass" : "fail";
  return rep;
}

// Semi-log variant for claims y ~ exp(-rho k): fit ln y against k, compare
// the decay rate, band on y e^{rho k}.
inline RateReport assess_exp_rate(const std::string& series_name,
                                  const std::vector<double>& ks,
                                  const std::vector<double>& ys, double rho,
                                  double tail_fraction = 0.5,
                                  double rel_tol = 0.2,
                                  double band_max = 10.0) {
  if (ks.size() != ys.size() || ks.size() < 20)
    throw ConfigError("assess_exp_rate: series must have equal length >= 20");
  RateReport rep;
  rep.series = series_name;
  rep.model = "vs_exp";
  rep.claimed = -rho;
  rep.tail_fraction = tail_fraction;

  std::size_t n = ks.size();
  std::size_t start = n - std::size_t(std::ceil(tail_fraction * double(n)));
  std::vector<double> kk, ly, prod;
  int dropped = 0;
  for (std::size_t i = start; i < n; ++i) {
    if (ys[i] > 0.0 && std::isfinite(ys[i]) && std::isfinite(ks[i])) {
      kk.push_back(ks[i]);
      ly.push_back(std::log(ys[i]));
      prod.push_back(ys[i] * std::exp(rho * ks[i]));
    } else {
      ++dropped;
    }
  }
  rep.used = int(kk.size());
  rep.dropped = dropped;
  rep.band = detail::max_over_median(prod);
  if (kk.size() < 10) {
    rep.verdict = "inconclusive";
    return rep;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < kk.size(); ++i) {
    mx += kk[i];
    my += ly[i];
  }
  mx /= double(kk.size());
  my /= double(kk.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < kk.size(); ++i) {
    double dx = kk[i] - mx, dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  rep.fitted_slope = sxx > 0.0 ? sxy / sxx : kNaN;
  rep.r_squared = sxx > 0.0 && syy > 0.0 ? sxy * sxy / (sxx * syy) : kNaN;
  bool ok = std::abs(rep.fitted_slope + rho) <= rel_tol * rho &&
            std::isfinite(rep.band) && rep.band <= band_max &&
            dropped * 10 < (rep.used + dropped);
  rep.verdict = ok ? "pass" : "fail";
  return rep;
}

// Central finite differences against the analytic gradient; worst relative
// error over coordinates. Probes are pulled one-sided at an open boundary.
inline double check_gradient(const ProxProblem& p, const Vec& x,
                             double h = 0.0) {
  if (!p.grad) throw ConfigError("check_gradient: problem has no grad");
  if (h <= 0.0)
    h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
  Vec g = p.grad(x);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (int j = 0; j < p.dim; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    if (!p.in_domain(xm)) xm[j] = x[j];
    if (!p.in_domain(xp)) xp[j] = x[j];
    double fd = (p.value(xp) - p.value(xm)) / (xp[j] - xm[j]);
    worst = std::max(worst, std::abs(fd - g[j]) / (1.0 + std::abs(g[j])));
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return worst;
}

// hess_vec against central differences of grad along v.
inline double check_hess_vec(const ProxProblem& p, const Vec& x, const Vec& v,
                             double h = 0.0) {
  if (!p.grad || !p.hess_vec)
    throw ConfigError("check_hess_vec: needs grad and hess_vec");
  if (h <= 0.0)
    h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
  double vn = v.norm();
  if (!(vn > 0.0)) return 0.0;
  Vec u = v / vn;
  Vec xp = x + h * u, xm = x - h * u;
  if (!p.in_domain(xm)) xm = x;
  if (!p.in_domain(xp)) xp = x;
  Vec fd = (p.grad(xp) - p.grad(xm)) / (xp - xm).norm();
  Vec an = p.hess_vec(x, u);
  return (fd - an).norm() / (1.0 + an.norm());
}

// Descent lemma f(y) <= f(x) + <grad f(x), y-x> + ||y-x||^2/(2s) for step
// s <= 1/L; returns the worst violation (positive = broken).
inline double check_descent_lemma(const ProxProblem& p, double s,
                                  const std::vector<std::pair<Vec, Vec>>& pairs) {
  if (!p.lipschitz_grad)
    throw ConfigError("check_descent_lemma: problem has no lipschitz_grad");
  if (!(s > 0.0) || s > 1.0 / *p.lipschitz_grad + 1e-15)
    throw ConfigError("check_descent_lemma: s must be in (0, 1/L]");
  if (!p.grad) throw ConfigError("check_descent_lemma: problem has no grad");
  double worst = -kInf;
  for (const auto& [x, y] : pairs) {
    double lhs = p.value_difference(y, x);
    double rhs = p.grad(x).dot(y - x) + (y - x).squaredNorm() / (2.0 * s);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

// Corollary f(x) - min f >= ||grad f(x)||^2 / (2L); worst violation.
inline double check_descent_corollary(const ProxProblem& p,
                                      const std::vector<Vec>& points) {
  if (!p.lipschitz_grad || !p.grad)
    throw ConfigError("check_descent_corollary: needs grad and lipschitz_grad");
  if (!p.xstar && !p.fmin)
    throw ConfigError("check_descent_corollary: needs xstar or fmin");
  double worst = -kInf;
  for (const Vec& x : points) {
    double gap = p.xstar ? p.value_difference(x, *p.xstar)
                         : p.value(x) - *p.fmin;
    double lower = p.grad(x).squaredNorm() / (2.0 * *p.lipschitz_grad);
    worst = std::max(worst, lower - gap);
  }
  return worst;
}

struct Lemma2Report {
  double worst_decrease = -kInf;  // phi_k(y_k) - phi_{k+1}(y_{k+1}) minus its bound
  std::int64_t at_k_decrease = 0;
  double worst_drift = -kInf;     // ||y_{k+1} - y_k|| minus its bound
  std::int64_t at_k_drift = 0;
};

// Viscosity-point monotonicity and drift bounds along a schedule:
//   phi_k(y_k) - phi_{k+1}(y_{k+1}) <= ((1-d)/2)(1/beta_k - 1/beta_{k+1}) ||y_{k+1}||^2
//   ||y_{k+1} - y_k|| <= (beta_dot_k / beta_{k+1}) ||y_{k+1}||
inline Lemma2Report check_lemma2(const ProxProblem& p,
                                 const BetaSchedule& schedule, double d,
                                 std::int64_t k_lo, std::int64_t k_hi) {
  if (k_hi <= k_lo) throw ConfigError("check_lemma2: empty k range");
  Lemma2Report rep;
  double beta = schedule.beta_k(k_lo);
  Vec y = viscosity_point(p, beta, d);
  for (std::int64_t k = k_lo; k < k_hi; ++k) {
    double beta_next = schedule.beta_k(k + 1);
    Vec y_next = viscosity_point(p, beta_next, d);
    double phi_drop = p.value_difference(y, y_next) +
                      (1.0 - d) / 2.0 *
                          (y.squaredNorm() / beta - y_next.squaredNorm() / beta_next);
    double bound = (1.0 - d) / 2.0 * (1.0 / beta - 1.0 / beta_next) *
                   y_next.squaredNorm();
    if (phi_drop - bound > rep.worst_decrease) {
      rep.worst_decrease = phi_drop - bound;
      rep.at_k_decrease = k;
    }
    double drift = (y_next - y).norm() -
                   (beta_next - beta) / beta_next * y_next.norm();
    if (drift > rep.worst_drift) {
      rep.worst_drift = drift;
      rep.at_k_drift = k;
    }
    beta = beta_next;
    y = std::move(y_next);
  }
  return rep;
}

inline std::string to_text(const HypothesisReport& r) {
  std::ostringstream o;
  o << "schedule = " << r.schedule << "\n";
  if (std::isfinite(r.c)) o << "c = " << r.c << "\n";
  if (std::isfinite(r.mu)) o << "mu = " << r.mu << "\n";
  if (std::isfinite(r.t_lo))
    o << "t_range = [" << r.t_lo << ", " << r.t_hi << "]\n";
  if (r.k_max > 0) o << "k_max = " << r.k_max << "\n";
  o << "growth_ok = " << (r.growth_ok ? "yes" : "no") << "\n";
  if (std::isfinite(r.margin)) {
    o << "margin = " << r.margin << "\n"
      << "margin_ok = " << (r.margin_ok ? "yes" : "no") << "\n"
      << "quotient_sup = " << r.quotient_sup << "\n"
      << "quotient_ok = " << (r.quotient_ok ? "yes" : "no") << "\n"
      << "guarded_points = " << r.guarded_points << "\n";
  }
  if (std::isfinite(r.ell_beta) || r.k_max > 0) {
    o << "ell_beta = " << r.ell_beta << "\n"
      << "ell_betadot = " << r.ell_betadot << "\n"
      << "strong_convergence_regime = "
      << (r.strong_convergence_regime ? "yes" : "no") << "\n";
  }
  return o.str();
}

}  // namespace tikhoprox
