#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tikhoprox/analysis.hpp"
#include "tikhoprox/dynamics.hpp"
#include "tikhoprox/problems.hpp"

using namespace tikhoprox;
using Catch::Approx;

namespace {

// constant beta = 1 over [2, 6]
OdeSystem analytic_system(double c) {
  Mat Q = Mat::Identity(2, 2);
  ProxProblem p = quadratic_problem(Q, Vec::Zero(2));
  return first_order_flow(p, c, table_schedule({1.0, 1.0, 1.0, 1.0, 1.0}));
}

double analytic_rel_err(double dt) {
  OdeSystem sys = analytic_system(2.0);
  Vec x0(2);
  x0 << 1.0, -0.5;
  Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 4.0, dt);
  Vec exact = x0 * std::exp(-3.0 * 2.0);  // xdot = -(beta + c) x
  return (traj.x.back() - exact).norm() / exact.norm();
}

}  // namespace

TEST_CASE("fixed-step integration hits the analytic exponential") {
  REQUIRE(analytic_rel_err(1e-3) <= 1e-6);
}

TEST_CASE("halving the step shows fourth-order convergence") {
  double ratio = analytic_rel_err(0.1) / analytic_rel_err(0.05);
  REQUIRE(ratio >= 12.0);
  REQUIRE(ratio <= 20.0);
}

TEST_CASE("integration endpoints and inputs are validated") {
  OdeSystem sys = analytic_system(2.0);
  Vec x0 = Vec::Ones(2);
  REQUIRE_THROWS_AS(integrate(sys, x0, std::nullopt, 2.0, 2.0, 1e-2),
                    ConfigError);
  REQUIRE_THROWS_AS(integrate(sys, x0, std::nullopt, 2.0, 4.0, 0.0),
                    ConfigError);
  ProxProblem barrier = log_barrier_quad_problem();
  OdeSystem flow = named_system("tral", barrier);
  Vec outside(2);
  outside << -2.0, 0.0;
  REQUIRE_THROWS_AS(integrate(flow, outside, std::nullopt, 2.0, 3.0, 1e-2),
                    ConfigError);

  Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 2.05, 1e-2);
  REQUIRE(traj.t.size() == 6);  // t0 sample plus five steps
  REQUIRE(traj.t.back() == Approx(2.05).margin(1e-12));  // exact landing
}

TEST_CASE("named systems validate their oracles") {
  ProxProblem barrier = log_barrier_quad_problem();
  REQUIRE_THROWS_AS(named_system("nosuch", barrier), ConfigError);
  ProxProblem box = abs_box_quad_problem(2.0, 3.0);  // no grad oracle
  REQUIRE_THROWS_AS(named_system("tral", box), ConfigError);
  ProxProblem gradonly = barrier;
  gradonly.hess_vec = nullptr;
  REQUIRE_NOTHROW(named_system("trisg", gradonly));
  REQUIRE_THROWS_AS(named_system("trish", gradonly), ConfigError);
}

TEST_CASE("scheduled flow tracks the minimum-norm solution on the barrier") {
  ProxProblem p = log_barrier_quad_problem();
  OdeSystem sys = named_system("tral", p);
  Vec x0 = Vec::Zero(2);
  Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 30.0, 1e-3);
  REQUIRE_FALSE(traj.truncated);
  REQUIRE((traj.x.back() - *p.xstar).norm() <= 1e-4);

  // distance to x* decays like 1/beta along the flow
  std::vector<double> betas, dists;
  for (std::size_t i = 0; i < traj.t.size(); ++i) {
    betas.push_back(sys.schedule.beta_at(traj.t[i]));
    dists.push_back((traj.x[i] - *p.xstar).norm());
  }
  RateReport rep = assess_power_rate("dist_xstar", "vs_beta", betas, dists, -1.0);
  REQUIRE(rep.verdict == "pass");

  // Lyapunov energy decays past the initial transient
  continuous_energy(p, traj, sys.c, sys.schedule);
  for (std::size_t i = 0; i + 1 < traj.t.size(); ++i) {
    if (traj.t[i] < 3.0) continue;
    REQUIRE(traj.E[i + 1] <= traj.E[i] + 1e-6 * (1.0 + std::abs(traj.E[i])));
  }
  // and dominates the squared curve distance
  for (std::size_t i = 0; i < traj.t.size(); i += 100)
    REQUIRE(traj.E[i] >= 0.5 * sys.c * traj.dist_y[i] * traj.dist_y[i] - 1e-12);
}

TEST_CASE("fast growth pushes the integrator into curve-tracking") {
  ProxProblem p = log_barrier_quad_problem();
  OdeSystem sys = named_system("trae", p);
  Vec x0 = Vec::Zero(2);
  Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 12.0, 1e-3);
  REQUIRE_FALSE(traj.truncated);
  REQUIRE(traj.snap_steps > 0);  // beta(12) ~ 1e10: explicit stepping is gone
  REQUIRE((traj.x.back() - *p.xstar).norm() <= 1e-5);
}

TEST_CASE("energy vanishes exactly on the viscosity curve") {
  ProxProblem p = log_barrier_quad_problem();
  BetaSchedule sched = polylog_schedule(2.0, 2.0, 2.0);
  std::vector<double> ts;
  for (int i = 0; i <= 40; ++i) ts.push_back(2.0 + 0.5 * i);
  std::vector<Vec> ys = viscosity_curve(p, sched, 5.0, ts);

  // norms grow toward ||x*|| monotonically, never past it
  double xstar_norm = p.xstar->norm();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    REQUIRE(ys[i].norm() <= xstar_norm + 1e-10);
    if (i) REQUIRE(ys[i].norm() >= ys[i - 1].norm() - 1e-12);
  }

  Trajectory on_curve;
  on_curve.t = ts;
  on_curve.x = ys;
  continuous_energy(p, on_curve, 5.0, sched);
  for (double e : on_curve.E) REQUIRE(std::abs(e) <= 1e-18);
}

TEST_CASE("plain fixed-step mode exposes the stiffness instability") {
  ProxProblem p = log_barrier_quad_problem();
  OdeSystem sys = named_system("tral", p);
  Vec x0 = Vec::Zero(2);
  IntegrateOptions opt;
  opt.stabilized = false;
  REQUIRE_THROWS_AS(integrate(sys, x0, std::nullopt, 2.0, 30.0, 1e-3, opt),
                    IntegrationError);
}

TEST_CASE("second-order systems descend and carry velocities") {
  ProxProblem p = log_barrier_quad_problem();
  for (const char* id : {"trisal", "trisg", "trish"}) {
    OdeSystem sys = named_system(id, p);
    Vec x0 = Vec::Zero(2);
    Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 10.0, 1e-3);
    INFO(id);
    REQUIRE_FALSE(traj.truncated);
    REQUIRE(traj.v.size() == traj.t.size());
    REQUIRE(traj.gap.back() < 0.5 * traj.gap.front());
    for (const Vec& x : traj.x) REQUIRE(p.in_domain(x));
  }
}

TEST_CASE("exploding second-order stiffness truncates with a diagnostic") {
  ProxProblem p = log_barrier_quad_problem();
  OdeSystem sys = named_system("trisae", p);
  Vec x0 = Vec::Zero(2);
  Trajectory traj = integrate(sys, x0, std::nullopt, 2.0, 30.0, 0.05);
  REQUIRE(traj.truncated);
  REQUIRE(traj.note == "stiffness exceeds the substep budget");
  REQUIRE(traj.truncated_at > 20.0);  // it got deep into the run first
  REQUIRE(std::isfinite(traj.x.back()[0]));
}

TEST_CASE("a trajectory fired at the open boundary stays inside") {
  ProxProblem p = log_barrier_quad_problem();
  OdeSystem sys = named_system("trisal", p);
  Vec x0 = Vec::Zero(2), v0(2);
  v0 << -30.0, 0.0;
  Trajectory traj = integrate(sys, x0, v0, 2.0, 4.0, 1e-2);
  for (const Vec& x : traj.x) REQUIRE(p.in_domain(x));
  if (!traj.truncated) {
    REQUIRE(traj.t.back() == Approx(4.0).margin(1e-12));
  } else {
    REQUIRE(traj.note == "step halving exhausted near the domain boundary");
  }
}
