// Runs the rescaled proximal iteration on the box-constrained test problem
// under two growth schedules and prints fitted decay rates for the
// subgradient residual.

#include <iostream>

#include "tikhoprox/analysis.hpp"
#include "tikhoprox/problems.hpp"
#include "tikhoprox/solver.hpp"

using namespace tikhoprox;

int main() {
  ProxProblem p = abs_box_quad_problem(2.0, 3.0);

  for (const std::string& sched :
       {std::string("polylog:m=3,q=3"), std::string("exppow:m=3,gamma=2,r=0.8")}) {
    SolverConfig cfg;
    cfg.schedule = parse_schedule(sched);
    cfg.max_iter = 2000;
    cfg.x0 = Vec(2);
    cfg.x0 << 1.5, -1.0;
    RunTrace trace = run_tikhonov_prox(p, cfg);

    std::vector<double> betas, residuals;
    for (const auto& rec : trace.records) {
      betas.push_back(rec.beta);
      residuals.push_back(rec.subgrad_res);
    }
    RateReport rep = assess_power_rate("subgrad_res", "vs_beta", betas,
                                       residuals, -1.0);
    std::cout << "schedule " << sched << "\n" << rep.to_text() << "\n";
  }
  return 0;
}
