#pragma once

#include <cmath>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"
#include "tikhoprox/prox_numeric.hpp"

namespace tikhoprox {

// Moreau envelope f_gamma(x) = min_z f(z) + ||z - x||^2 / (2 gamma),
// evaluated through the base problem's prox.

inline double moreau_value(const ProxProblem& base, double gamma, const Vec& x) {
  if (!(gamma > 0.0)) throw ConfigError("moreau_value: gamma must be > 0");
  Vec z = base.prox(gamma, x);
  return base.value(z) + (x - z).squaredNorm() / (2.0 * gamma);
}

// grad f_gamma(x) = (x - prox_{gamma f}(x)) / gamma; globally 1/gamma-Lipschitz.
inline Vec moreau_grad(const ProxProblem& base, double gamma, const Vec& x) {
  if (!(gamma > 0.0)) throw ConfigError("moreau_grad: gamma must be > 0");
  return (x - base.prox(gamma, x)) / gamma;
}

// The envelope as a problem in its own right. Smooth everywhere, same
// minimizers and min value as the base; prox by the composition rule
// prox_{theta f_gamma}(x) = (gamma x + theta prox_{(gamma+theta) f}(x)) / (gamma + theta).
inline ProxProblem moreau_envelope_problem(const ProxProblem& base,
                                           double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("moreau_envelope: gamma must be > 0");
  ProxProblem p;
  p.name = base.name + "_moreau";
  p.dim = base.dim;
  p.value = [base, gamma](const Vec& x) { return moreau_value(base, gamma, x); };
  p.grad = [base, gamma](const Vec& x) { return moreau_grad(base, gamma, x); };
  p.prox = [base, gamma](double theta, const Vec& x) {
    Vec zb = base.prox(gamma + theta, x);
    return Vec((gamma * x + theta * zb) / (gamma + theta));
  };
  p.xstar = base.xstar;
  p.fmin = base.fmin;
  p.lipschitz_grad = 1.0 / gamma;
  return p;
}

// Residual of the composition rule when the left side is computed by the
// generic Newton prox on the (smooth) envelope. Nothing here reuses the
// closed form under test, so this doubles as an independent oracle check.
inline double moreau_prox_identity_check(const ProxProblem& base, double gamma,
                                         double theta, const Vec& x) {
  if (!(theta > 0.0)) throw ConfigError("moreau identity: theta must be > 0");
  ProxProblem env;  // value/grad only, so prox_numeric cannot shortcut
  env.name = base.name + "_moreau_gradonly";
  env.dim = base.dim;
  env.value = [base, gamma](const Vec& v) { return moreau_value(base, gamma, v); };
  env.grad = [base, gamma](const Vec& v) { return moreau_grad(base, gamma, v); };
  Vec lhs = prox_numeric(env, x, theta);
  Vec rhs = (gamma * x + theta * base.prox(gamma + theta, x)) / (gamma + theta);
  return (lhs - rhs).norm();
}

}  // namespace tikhoprox
