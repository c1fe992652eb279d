#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"
#include "tikhoprox/prox_numeric.hpp"
#include "tikhoprox/schedule.hpp"

namespace tikhoprox {

// Damped Newton for the Tikhonov curve equation grad f(z) + eps z = 0, the
// continuous analogue of a prox at 0. eps = 0 degenerates to plain
// minimization, which is exactly what the curve converges to.
inline Vec tikhonov_curve_point(const ProxProblem& p, double eps,
                                const Vec& warm) {
  if (!p.grad) throw ConfigError("tikhonov_curve_point: problem has no grad");
  Vec z = p.clamp_inside(warm, 1e-9);
  double fnorm = kInf;
  for (int it = 0; it < 60; ++it) {
    Vec g = p.grad(z);
    Vec F = g + eps * z;
    fnorm = F.norm();
    if (fnorm <= 1e-12 * (1.0 + g.norm() + std::abs(eps) * z.norm())) return z;
    Mat J = detail::hessian_or_fd(p, z);
    J.diagonal().array() += eps;
    Vec step = -J.ldlt().solve(F);
    if (!step.allFinite() || step.dot(F) >= 0.0) step = -F;
    double alpha = 1.0;
    Vec zn = z + step;
    int halvings = 0;
    while (halvings < 60 &&
           (!zn.allFinite() || !p.in_domain(zn) ||
            (p.grad(zn) + eps * zn).norm() > fnorm)) {
      alpha *= 0.5;
      zn = z + alpha * step;
      ++halvings;
    }
    if (halvings >= 60) break;
    z = zn;
  }
  throw ConvergenceError("tikhonov_curve_point: no convergence", fnorm);
}

// y(t) = argmin f + (c/(2 beta(t))) ||.||^2 along a time grid, warm-started
// point to point. Falls back to the prox oracle when f has no gradient.
inline std::vector<Vec> viscosity_curve(const ProxProblem& p,
                                        const BetaSchedule& schedule, double c,
                                        const std::vector<double>& t_grid) {
  if (!(c > 0.0)) throw ConfigError("viscosity_curve: c must be > 0");
  std::vector<Vec> ys;
  ys.reserve(t_grid.size());
  Vec warm = p.xstar ? *p.xstar : p.clamp_inside(Vec::Zero(p.dim), 1e-3);
  for (double t : t_grid) {
    double beta = schedule.beta_at(t);
    if (p.grad) {
      double eps = std::isfinite(beta) ? c / beta : 0.0;
      warm = tikhonov_curve_point(p, eps, warm);
      ys.push_back(warm);
    } else {
      ys.push_back(p.prox(std::isfinite(beta) ? beta / c : 1e300,
                          Vec::Zero(p.dim)));
    }
  }
  return ys;
}

enum class FlowKind {
  FirstOrderTikhonov,  // x' + beta(t) grad f(x) + c x = 0
  TRAL,                // the same with c = 5, beta = 2 t^2 ln^2 t
  TRAE,                //                c = 5, beta = 2 t^2 exp(2 t^0.9)
  TRISAL,  // x'' + 5 x' + 2 t^2 ln^2 t grad f + 5 x = 0
  TRISAE,  // x'' + 5 x' + 2 t^2 exp(2 t^0.8) grad f + 5 x = 0
  TRISG,   // x'' + 5 t^-4/5 x' + grad f + t^-8/5 x = 0
  TRISH,   // TRISG plus hessian damping 2 hess f(x) x'
};

struct OdeSystem {
  FlowKind kind = FlowKind::FirstOrderTikhonov;
  ProxProblem problem;
  double c = 5.0;          // first-order damping coefficient
  BetaSchedule schedule;   // beta(t) for the gradient term (when scheduled)
  bool second_order = false;
  bool hessian_damping = false;
  std::function<double(double)> damping;   // a(t), second order only
  std::function<double(double)> tikhonov;  // eps(t), second order only
  bool constant_beta_one = false;          // TRISG/TRISH carry beta = 1

  double beta_at(double t) const {
    return constant_beta_one ? 1.0 : schedule.beta_at(t);
  }
};

inline OdeSystem first_order_flow(const ProxProblem& p, double c,
                                  const BetaSchedule& schedule) {
  if (!p.grad) throw ConfigError("flow: problem has no grad oracle");
  if (!(c > 0.0)) throw ConfigError("flow: c must be > 0");
  OdeSystem s;
  s.kind = FlowKind::FirstOrderTikhonov;
  s.problem = p;
  s.c = c;
  s.schedule = schedule;
  return s;
}

// The six named systems with their fixed printed coefficients.
inline OdeSystem named_system(const std::string& id, const ProxProblem& p) {
  if (!p.grad) throw ConfigError("system '" + id + "': problem has no grad");
  OdeSystem s;
  s.problem = p;
  if (id == "tral") {
    s = first_order_flow(p, 5.0, polylog_schedule(2, 2, 2.0));
    s.kind = FlowKind::TRAL;
  } else if (id == "trae") {
    s = first_order_flow(p, 5.0, exppow_schedule(2, 2, 0.9, 2.0));
    s.kind = FlowKind::TRAE;
  } else if (id == "trisal" || id == "trisae") {
    s.kind = id == "trisal" ? FlowKind::TRISAL : FlowKind::TRISAE;
    s.schedule = id == "trisal" ? polylog_schedule(2, 2, 2.0)
                                : exppow_schedule(2, 2, 0.8, 2.0);
    s.second_order = true;
    s.damping = [](double) { return 5.0; };
    s.tikhonov = [](double) { return 5.0; };
  } else if (id == "trisg" || id == "trish") {
    s.kind = id == "trisg" ? FlowKind::TRISG : FlowKind::TRISH;
    s.second_order = true;
    s.constant_beta_one = true;
    s.damping = [](double t) { return 5.0 * std::pow(t, -0.8); };
    s.tikhonov = [](double t) { return std::pow(t, -1.6); };
    if (id == "trish") {
      if (!p.hess_vec)
        throw ConfigError("system 'trish' needs a hess_vec oracle");
      s.hessian_damping = true;
    }
  } else {
    throw ConfigError("unknown system id '" + id + "'");
  }
  return s;
}

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;  // empty for first-order systems
  std::vector<double> gap, grad_norm;
  std::vector<double> dist_y, E;  // filled by attach_flow_diagnostics
  bool truncated = false;
  double truncated_at = kNaN;
  std::string note;
  std::int64_t snap_steps = 0;
  std::int64_t substeps = 0;
  int max_halvings = 0;
};

struct IntegrateOptions {
  // Per-substep stiffness budget dt*(beta*Lambda + c); explicit RK4 is stable
  // to ~2.785 on the negative real axis.
  double z_per_substep = 2.5;
  // Above this per-output-step stiffness the flow is advanced by solving the
  // quasi-static curve equation instead: the exact flow contracts onto that
  // curve like exp(-z) per step, which is < 1e-21 at the threshold, so the
  // curve is the flow to double precision there.
  double z_snap = 50.0;
  std::int64_t max_substeps = 400000;  // per output step
  // false = fixed-step textbook RK4 (no sub-stepping, no snap); kept for
  // convergence-order measurements and for demonstrating the instability.
  bool stabilized = true;
};

struct IntegrationError : std::runtime_error {
  double t;
  IntegrationError(const std::string& what, double at)
      : std::runtime_error(what + " at t=" + std::to_string(at)), t(at) {}
};

namespace detail {

// Largest Hessian eigenvalue at x: exact constant when the problem carries
// one, otherwise a few warm-started power iterations on hess_vec.
inline double lambda_max_estimate(const ProxProblem& p, const Vec& x,
                                  Vec& warm) {
  if (p.lipschitz_grad) return *p.lipschitz_grad;
  if (!p.hess_vec) return 0.0;
  if (warm.size() != x.size()) warm = Vec::Ones(x.size()).normalized();
  double lam = 0.0;
  for (int it = 0; it < 4; ++it) {
    Vec hv = p.hess_vec(x, warm);
    double n = hv.norm();
    if (!(n > 0.0) || !std::isfinite(n)) return 0.0;
    lam = warm.dot(hv);
    warm = hv / n;
  }
  return std::max(lam, 0.0);
}

}  // namespace detail

// Fixed output grid t0, t0+dt, ..., t_end. Inside each output step the
// right-hand side is integrated by classical RK4 with enough sub-steps to
// keep the step stable (see IntegrateOptions); very stiff first-order steps
// switch to the quasi-static curve solve. Sub-steps that land a stage outside
// the open domain are halved, up to 30 times, after which the trajectory is
// returned truncated with a note. A non-finite state after an accepted step
// raises IntegrationError.
inline Trajectory integrate(const OdeSystem& sys, const Vec& x0,
                            std::optional<Vec> v0, double t0, double t_end,
                            double dt, IntegrateOptions opt = {}) {
  const ProxProblem& p = sys.problem;
  if (!(dt > 0.0)) throw ConfigError("integrate: dt must be > 0");
  if (!(t_end > t0)) throw ConfigError("integrate: t_end must exceed t0");
  if (!p.in_domain(x0)) throw ConfigError("integrate: x0 outside the domain");
  if (x0.size() != p.dim) throw ConfigError("integrate: x0 dimension");

  const int n = p.dim;
  const bool second = sys.second_order;
  Vec state(second ? 2 * n : n);
  state.head(n) = x0;
  if (second) state.tail(n) = v0 ? *v0 : Vec::Zero(n);

  // rhs returns false when a stage point leaves the domain or misbehaves.
  auto rhs = [&](double t, const Vec& w, Vec& out) -> bool {
    auto xw = w.head(n);
    if (!xw.allFinite() || !p.in_domain(xw)) return false;
    double beta = sys.beta_at(t);
    Vec g = p.grad(xw);
    if (!g.allFinite()) return false;
    if (!second) {
      out = -(beta * g + sys.c * xw);
    } else {
      auto vw = w.tail(n);
      Vec acc = -(sys.damping(t) * vw + beta * g + sys.tikhonov(t) * xw);
      if (sys.hessian_damping) acc -= 2.0 * p.hess_vec(xw, vw);
      out.resize(2 * n);
      out.head(n) = vw;
      out.tail(n) = acc;
    }
    return out.allFinite();
  };

  Vec k1, k2, k3, k4, tmp;
  auto rk4_step = [&](double t, const Vec& w, double h, Vec& out) -> bool {
    if (!rhs(t, w, k1)) return false;
    tmp = w + 0.5 * h * k1;
    if (!rhs(t + 0.5 * h, tmp, k2)) return false;
    tmp = w + 0.5 * h * k2;
    if (!rhs(t + 0.5 * h, tmp, k3)) return false;
    tmp = w + h * k3;
    if (!rhs(t + h, tmp, k4)) return false;
    out = w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return out.allFinite();
  };

  Trajectory traj;
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.x.push_back(state.head(n));
    if (second) traj.v.push_back(state.tail(n));
    Vec g = p.grad(state.head(n));
    traj.grad_norm.push_back(g.norm());
    if (p.xstar && p.fmin)
      traj.gap.push_back(p.value_difference(state.head(n), *p.xstar));
    else if (p.fmin)
      traj.gap.push_back(p.value(state.head(n)) - *p.fmin);
    else
      traj.gap.push_back(kNaN);
  };
  record(t0);

  Vec power_warm;
  const std::int64_t n_out =
      std::int64_t(std::ceil((t_end - t0) / dt - 1e-9));
  double t = t0;
  for (std::int64_t i = 0; i < n_out; ++i) {
    double t_next = (i + 1 == n_out) ? t_end : t0 + double(i + 1) * dt;
    double h_out = t_next - t;
    double lam = detail::lambda_max_estimate(p, state.head(n), power_warm);
    double beta_hi = std::max(sys.beta_at(t), sys.beta_at(t_next));

    if (opt.stabilized && !second) {
      double z = h_out * (beta_hi * lam + sys.c);
      if (z > opt.z_snap || !std::isfinite(z)) {
        // Quasi-static regime: track the curve, which the flow matches to
        // machine precision here (contraction factor exp(-z) per step).
        double eps = std::isfinite(beta_hi) ? sys.c / sys.beta_at(t_next) : 0.0;
        state = tikhonov_curve_point(p, eps, state);
        ++traj.snap_steps;
        t = t_next;
        record(t);
        continue;
      }
    }

    std::int64_t nsub = 1;
    if (opt.stabilized) {
      double z = second ? h_out * std::sqrt(std::max(
                              beta_hi * lam + sys.tikhonov(t_next), 0.0))
                        : h_out * (beta_hi * lam + sys.c);
      nsub = std::int64_t(std::ceil(z / opt.z_per_substep));
      nsub = std::max<std::int64_t>(nsub, 1);
      if (nsub > opt.max_substeps || !std::isfinite(z)) {
        traj.truncated = true;
        traj.truncated_at = t;
        traj.note = "stiffness exceeds the substep budget";
        return traj;
      }
    }

    double h = h_out / double(nsub);
    double remaining = h_out;
    double tau = t;
    while (remaining > 1e-14 * h_out) {
      double h_try = std::min(h, remaining);
      Vec next;
      int halvings = 0;
      while (!rk4_step(tau, state, h_try, next)) {
        // In the plain fixed-step mode a bad stage is the instability the
        // caller asked to see, not something to paper over.
        if (!opt.stabilized)
          throw IntegrationError(
              "integration produced a non-finite or out-of-domain state", tau);
        h_try *= 0.5;
        if (++halvings > 30) {
          traj.truncated = true;
          traj.truncated_at = tau;
          traj.note = "step halving exhausted near the domain boundary";
          traj.max_halvings = std::max(traj.max_halvings, halvings);
          return traj;
        }
      }
      traj.max_halvings = std::max(traj.max_halvings, halvings);
      state = next;
      ++traj.substeps;
      tau += h_try;
      remaining -= h_try;
    }
    t = t_next;
    record(t);
  }
  return traj;
}

// E(t) = beta(t) (phi_t(x) - phi_t(y)) + (c/2) ||x - y||^2 along a computed
// trajectory, phi_t = f + (c / (2 beta(t))) ||.||^2, y the Tikhonov curve.
// The beta * (c/(2 beta)) product cancels analytically, so the norm part is
// computed without ever forming the large beta.
inline std::vector<double> continuous_energy(const ProxProblem& p,
                                             Trajectory& traj, double c,
                                             const BetaSchedule& schedule) {
  std::vector<Vec> ys = viscosity_curve(p, schedule, c, traj.t);
  traj.dist_y.resize(traj.t.size());
  traj.E.resize(traj.t.size());
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    const Vec& x = traj.x[i];
    const Vec& y = ys[i];
    traj.dist_y[i] = (x - y).norm();
    double beta = schedule.beta_at(traj.t[i]);
    double vd = p.value_difference(x, y);
    double term1 = vd == 0.0 ? 0.0 : beta * vd;
    traj.E[i] = term1 + 0.5 * c * norm_sq_diff(x, y) +
                0.5 * c * (x - y).squaredNorm();
  }
  return traj.E;
}

}  // namespace tikhoprox
