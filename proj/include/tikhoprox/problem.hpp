#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "tikhoprox/core.hpp"

namespace tikhoprox {

// A convex objective presented through oracles. `value` and `prox` are
// mandatory; everything else is optional and diagnostics degrade gracefully
// when an oracle is missing. `prox(lam, x)` evaluates prox_{lam f}(x).
struct ProxProblem {
  std::string name;
  int dim = 0;

  std::function<double(const Vec&)> value;
  // f(x) - f(y) in difference-stable form. Energies are O(beta_dot^2/beta^3)
  // while f itself is O(1); without this oracle their evaluation is pure
  // cancellation noise. Optional: value_difference() falls back to value().
  std::function<double(const Vec&, const Vec&)> value_diff;
  std::function<Vec(double, const Vec&)> prox;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&, const Vec&)> hess_vec;

  // Open lower bounds, componentwise x_i > domain_lower_i (use -inf for free
  // coordinates). Empty optional means the whole space.
  std::optional<Vec> domain_lower;

  std::optional<Vec> xstar;  // minimum-norm minimizer, when known
  std::optional<double> fmin;
  std::optional<double> lipschitz_grad;

  bool in_domain(const Vec& x) const {
    if (!domain_lower) return true;
    for (int i = 0; i < dim; ++i)
      if (!(x[i] > (*domain_lower)[i])) return false;
    return true;
  }

  // Pull x to lie at least `margin` inside every finite lower bound.
  Vec clamp_inside(const Vec& x, double margin) const {
    Vec z = x;
    if (domain_lower) {
      for (int i = 0; i < dim; ++i) {
        double lo = (*domain_lower)[i];
        if (std::isfinite(lo) && z[i] < lo + margin) z[i] = lo + margin;
      }
    }
    return z;
  }

  double value_difference(const Vec& x, const Vec& y) const {
    if (value_diff) return value_diff(x, y);
    return value(x) - value(y);
  }
};

}  // namespace tikhoprox
