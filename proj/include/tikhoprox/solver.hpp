#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"
#include "tikhoprox/schedule.hpp"

namespace tikhoprox {

struct SolverConfig {
  double d = 0.5;  // in (0, 1)
  BetaSchedule schedule;
  std::int64_t k0 = 0;        // 0 means schedule start
  std::int64_t max_iter = 1000;
  Vec x0;                     // empty means problem default (ones, clamped inside)
  double stop_tol = 0.0;      // on ||x_{k+1} - x_k||; 0 disables
  double rho = 0.0;           // in (0, 1-d); 0 means (1-d)/2
  double lambda_energy = 0.0; // energy coupling weight; 0 means auto
};

enum class Termination { MaxIter, StopTol, ScheduleOverflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::MaxIter: return "max_iter";
    case Termination::StopTol: return "stop_tol";
    case Termination::ScheduleOverflow: return "schedule_overflow";
  }
  return "?";
}

// One row per iteration index k. x and the cheap per-step quantities are
// written by the iteration loop; f_val/gap/y/dist_y/E by the diagnostics
// pass (so that wall_time measures the bare iteration).
struct IterateRecord {
  std::int64_t k = 0;
  Vec x;
  double beta = kNaN;
  double f_val = kNaN;
  double gap = kNaN;
  Vec y;                  // viscosity point at beta_k
  double dist_y = kNaN;
  double step = kNaN;         // ||x_{k+1} - x_k||
  double subgrad_res = kNaN;  // ||(d x_k - x_{k+1}) / beta_k||, an element of df(x_{k+1})
  double E = kNaN;            // discrete energy; undefined at the first index
};

struct RunTrace {
  SolverConfig config;
  std::string problem_name;
  std::string algorithm;      // "tikhoprox", "laszlo", "ppa"
  std::string params_desc;
  std::vector<IterateRecord> records;
  Vec final_x;
  Termination terminated_by = Termination::MaxIter;
  double wall_time_s = 0.0;
  double lambda_used = kNaN;
  bool diagnostics_filled = false;
};

inline Vec default_x0(const ProxProblem& p) {
  return p.clamp_inside(Vec::Ones(p.dim), 0.5);
}

// y(beta) = prox_{beta/(1-d) f}(0): the unique minimizer of
// f + ((1-d)/(2 beta)) ||.||^2.
inline Vec viscosity_point(const ProxProblem& p, double beta, double d) {
  if (!(d > 0.0) || !(d < 1.0)) throw ConfigError("viscosity_point: d in (0,1)");
  if (!(beta > 0.0)) throw ConfigError("viscosity_point: beta > 0");
  return p.prox(beta / (1.0 - d), Vec::Zero(p.dim));
}

// phi_k(x) - phi_k(y) for phi_k = f + ((1-d)/(2 beta)) ||.||^2, evaluated in
// difference form. E_k decays like (beta_dot/beta)^2/beta while phi itself is
// O(1), so the naive subtraction would be pure rounding noise.
inline double phi_gap(const ProxProblem& p, double beta, double d, const Vec& x,
                      const Vec& y) {
  return p.value_difference(x, y) +
         ((1.0 - d) / (2.0 * beta)) * norm_sq_diff(x, y);
}

// Energy weight: lambda = d ((1 + mu) sup_k beta_{k+1}/beta_k - 1) + 0.1
// with mu = rho / (1 - rho), the sup taken over the recorded horizon.
inline double resolve_lambda_energy(const SolverConfig& cfg,
                                    const std::vector<IterateRecord>& records) {
  if (cfg.lambda_energy > 0.0) return cfg.lambda_energy;
  double rho = cfg.rho > 0.0 ? cfg.rho : 0.5 * (1.0 - cfg.d);
  double mu = rho / (1.0 - rho);
  double max_ratio = 1.0;
  for (std::size_t i = 0; i + 1 < records.size(); ++i)
    max_ratio = std::max(max_ratio, records[i + 1].beta / records[i].beta);
  return cfg.d * ((1.0 + mu) * max_ratio - 1.0) + 0.1;
}

// E_k = beta_k (phi_k(x_k) - phi_k(y_k)) + (lambda/2) ||x_k - y_{k-1}||^2.
// Undefined at the first record (no y_{k-1}); the returned vector carries NaN
// there. Fills y into the records when absent.
inline std::vector<double> discrete_energy(const ProxProblem& p,
                                           std::vector<IterateRecord>& records,
                                           const SolverConfig& cfg,
                                           double* lambda_out = nullptr) {
  double lambda = resolve_lambda_energy(cfg, records);
  if (lambda_out) *lambda_out = lambda;
  std::vector<double> E(records.size(), kNaN);
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& rec = records[i];
    if (rec.y.size() == 0) rec.y = viscosity_point(p, rec.beta, cfg.d);
    if (i == 0) continue;
    double coupling = (records[i - 1].y.size() == 0)
                          ? kNaN
                          : (rec.x - records[i - 1].y).squaredNorm();
    E[i] = rec.beta * phi_gap(p, rec.beta, cfg.d, rec.x, rec.y) +
           0.5 * lambda * coupling;
    rec.E = E[i];
  }
  return E;
}

// Fill f_val/gap/y/dist_y/E on a finished trace. gap uses the stable value
// difference against xstar when available, f - fmin otherwise, NaN when the
// problem carries neither (the bench layer then rebases against best-seen).
inline void fill_diagnostics(const ProxProblem& p, RunTrace& trace) {
  if (trace.diagnostics_filled) return;
  for (auto& rec : trace.records) {
    rec.f_val = p.value(rec.x);
    if (p.xstar && p.fmin)
      rec.gap = p.value_difference(rec.x, *p.xstar);
    else if (p.fmin)
      rec.gap = rec.f_val - *p.fmin;
  }
  if (trace.algorithm == "tikhoprox") {
    for (auto& rec : trace.records) {
      rec.y = viscosity_point(p, rec.beta, trace.config.d);
      rec.dist_y = (rec.x - rec.y).norm();
    }
    discrete_energy(p, trace.records, trace.config, &trace.lambda_used);
  }
  trace.diagnostics_filled = true;
}

// x_{k+1} = prox_{beta_k f}(d x_k), k = k0, k0+1, ...
// Record k holds x_k plus the k -> k+1 transition quantities; the state after
// the last transition lands in final_x.
inline RunTrace run_tikhonov_prox(const ProxProblem& p, SolverConfig cfg,
                                  bool with_diagnostics = true) {
  if (!(cfg.d > 0.0) || !(cfg.d < 1.0))
    throw ConfigError("run_tikhonov_prox: d must be in (0, 1)");
  if (cfg.rho != 0.0 && (!(cfg.rho > 0.0) || !(cfg.rho < 1.0 - cfg.d)))
    throw ConfigError("run_tikhonov_prox: rho must be in (0, 1-d)");
  if (cfg.max_iter < 1) throw ConfigError("run_tikhonov_prox: max_iter >= 1");
  if (cfg.k0 == 0) cfg.k0 = cfg.schedule.k0();
  if (cfg.k0 < cfg.schedule.k0())
    throw ConfigError("run_tikhonov_prox: k0 below schedule start");
  if (cfg.x0.size() == 0) cfg.x0 = default_x0(p);

  RunTrace trace;
  trace.config = cfg;
  trace.problem_name = p.name;
  trace.algorithm = "tikhoprox";
  trace.records.reserve(std::size_t(cfg.max_iter));
  trace.terminated_by = Termination::MaxIter;

  auto t_start = std::chrono::steady_clock::now();
  Vec x = cfg.x0;
  for (std::int64_t i = 0; i < cfg.max_iter; ++i) {
    std::int64_t k = cfg.k0 + i;
    double beta = cfg.schedule.beta_k(k);
    if (!std::isfinite(beta)) {
      trace.terminated_by = Termination::ScheduleOverflow;
      break;
    }
    Vec xn = p.prox(beta, Vec(cfg.d * x));
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.beta = beta;
    rec.step = (xn - x).norm();
    rec.subgrad_res = (cfg.d * x - xn).norm() / beta;
    trace.records.push_back(std::move(rec));
    x = xn;
    if (cfg.stop_tol > 0.0 && trace.records.back().step <= cfg.stop_tol) {
      trace.terminated_by = Termination::StopTol;
      break;
    }
  }
  trace.final_x = x;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  if (with_diagnostics) fill_diagnostics(p, trace);
  return trace;
}

struct LaszloParams {
  double alpha = 2.0;
  double q = 0.8;      // inertia exponent, in (0, 1)
  double p = 2.0;      // Tikhonov exponent, <= 2
  double c = 5.0;
  double lambda = 5.0; // prox scale
  double delta = 2.0;  // prox exponent, lambda_k = lambda k^delta
};

// Inertial proximal Tikhonov baseline:
//   u_k = x_k + (1 - alpha/k^q)(x_k - x_{k-1})
//   x_{k+1} = prox_{lambda_k f}(u_k - (c/k^p) x_k),   lambda_k = lambda k^delta
// k counts from 1; x0, x1 are the two seeds. The beta column of the records
// carries lambda_k; viscosity/energy diagnostics stay NaN (they belong to the
// d-rescaled iteration).
inline RunTrace run_laszlo(const ProxProblem& prob, const LaszloParams& par,
                           const Vec& x0, const Vec& x1,
                           std::int64_t max_iter) {
  if (!(par.q > 0.0) || !(par.q < 1.0))
    throw ConfigError("run_laszlo: q must be in (0, 1)");
  if (!(par.p <= 2.0)) throw ConfigError("run_laszlo: p must be <= 2");
  if (!(par.c > 0.0)) throw ConfigError("run_laszlo: c must be > 0");
  if (!(par.lambda > 0.0)) throw ConfigError("run_laszlo: lambda must be > 0");
  if (max_iter < 1) throw ConfigError("run_laszlo: max_iter >= 1");

  RunTrace trace;
  trace.problem_name = prob.name;
  trace.algorithm = "laszlo";
  {
    std::ostringstream o;
    o << "alpha=" << par.alpha << ",q=" << par.q << ",p=" << par.p
      << ",c=" << par.c << ",lambda=" << par.lambda << ",delta=" << par.delta;
    trace.params_desc = o.str();
  }
  trace.config.max_iter = max_iter;
  trace.config.x0 = x1;
  trace.records.reserve(std::size_t(max_iter));

  auto t_start = std::chrono::steady_clock::now();
  Vec xm = x0, x = x1;
  for (std::int64_t k = 1; k <= max_iter; ++k) {
    double kk = double(k);
    double lam_k = par.lambda * std::pow(kk, par.delta);
    if (!std::isfinite(lam_k)) {
      trace.terminated_by = Termination::ScheduleOverflow;
      break;
    }
    Vec u = x + (1.0 - par.alpha / std::pow(kk, par.q)) * (x - xm);
    Vec arg = u - (par.c / std::pow(kk, par.p)) * x;
    Vec xn = prob.prox(lam_k, arg);
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.beta = lam_k;
    rec.step = (xn - x).norm();
    rec.subgrad_res = (arg - xn).norm() / lam_k;
    trace.records.push_back(std::move(rec));
    xm = x;
    x = xn;
  }
  trace.final_x = x;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  fill_diagnostics(prob, trace);
  return trace;
}

// x_{k+1} = prox_{lam f}(x_k), the unregularized proximal point baseline.
inline RunTrace run_vanilla_ppa(const ProxProblem& prob, double lam,
                                const Vec& x0, std::int64_t max_iter) {
  if (!(lam > 0.0)) throw ConfigError("run_vanilla_ppa: lam must be > 0");
  if (max_iter < 1) throw ConfigError("run_vanilla_ppa: max_iter >= 1");
  RunTrace trace;
  trace.problem_name = prob.name;
  trace.algorithm = "ppa";
  {
    std::ostringstream o;
    o << "lam=" << lam;
    trace.params_desc = o.str();
  }
  trace.config.max_iter = max_iter;
  trace.config.x0 = x0;
  trace.records.reserve(std::size_t(max_iter));

  auto t_start = std::chrono::steady_clock::now();
  Vec x = x0;
  for (std::int64_t k = 0; k < max_iter; ++k) {
    Vec xn = prob.prox(lam, x);
    IterateRecord rec;
    rec.k = k;
    rec.x = x;
    rec.beta = lam;
    rec.step = (xn - x).norm();
    rec.subgrad_res = (x - xn).norm() / lam;
    trace.records.push_back(std::move(rec));
    x = xn;
  }
  trace.final_x = x;
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  fill_diagnostics(prob, trace);
  return trace;
}

}  // namespace tikhoprox
