#pragma once

#include <cmath>
#include <vector>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"

namespace tikhoprox {

namespace detail {

// Hessian of f at z, either assembled from hess_vec or as a central
// finite-difference Jacobian of grad.
inline Mat hessian_or_fd(const ProxProblem& p, const Vec& z) {
  const int n = p.dim;
  Mat H(n, n);
  if (p.hess_vec) {
    Vec e = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      H.col(j) = p.hess_vec(z, e);
      e[j] = 0.0;
    }
    return H;
  }
  const double h =
      std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + z.norm());
  Vec zp = z, zm = z;
  for (int j = 0; j < n; ++j) {
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    // Keep probes inside an open domain; one-sided fallback near the edge.
    if (!p.in_domain(zm)) zm[j] = z[j];
    H.col(j) = (p.grad(zp) - p.grad(zm)) / (zp[j] - zm[j]);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace detail

// prox_{lam f}(x) for differentiable f by damped Newton on the stationarity
// equation grad f(z) + (z - x)/lam = 0. Convergence is declared on the mixed
// test ||lam grad(z) + z - x|| <= tol (1 + lam||grad(z)|| + ||z - x||); the
// pure absolute reading is unreachable in doubles once lam >> 1e6 because
// lam * ulp(grad) alone exceeds any fixed tol.
inline Vec prox_numeric(const ProxProblem& p, const Vec& x, double lam,
                        double tol = 1e-10, int max_iter = 100) {
  if (!p.grad) throw ConfigError("prox_numeric: problem has no grad oracle");
  if (!(lam > 0.0)) throw ConfigError("prox_numeric: lam must be > 0");
  if (!(tol > 0.0)) throw ConfigError("prox_numeric: tol must be > 0");

  Vec z = p.clamp_inside(x, 1e-6);
  auto subprob = [&](const Vec& v) {
    return lam * p.value(v) + 0.5 * (v - x).squaredNorm();
  };
  double gz = subprob(z);
  double unscaled = kInf;
  for (int it = 0; it < max_iter; ++it) {
    const Vec g = p.grad(z);
    const Vec r = g + (z - x) / lam;  // residual / lam, well-scaled
    unscaled = lam * r.norm();
    const double scale = 1.0 + lam * g.norm() + (z - x).norm();
    if (unscaled <= tol * scale) return z;

    Mat J = detail::hessian_or_fd(p, z);
    J.diagonal().array() += 1.0 / lam;
    Vec step = -J.ldlt().solve(r);
    // Fall back to a (scaled) gradient step if the Newton direction fails
    // to descend, e.g. an indefinite finite-difference Jacobian.
    if (!step.allFinite() || step.dot(r) >= 0.0) step = -r;
    // A step at rounding-noise size cannot improve z; the residual test
    // above may still be unreachable because lam amplifies the noise floor
    // of grad (lam ~ 1e9 turns 1e-16 of cancellation into 1e-7 of residual).
    if (step.norm() <= 512.0 * std::numeric_limits<double>::epsilon() *
                          (1.0 + z.norm() + (z - x).norm()))
      return z;

    // Accept on strict objective decrease or, when the objective has gone
    // flat at ulp resolution (its decrease near the minimizer is O(dist^2)
    // and drowns long before the residual target is met), on a residual
    // decrease, which stays meaningful down to the gradient's noise floor.
    const double r_norm = r.norm();
    auto acceptable = [&](const Vec& v) {
      if (!v.allFinite() || !p.in_domain(v)) return false;
      if (subprob(v) < gz) return true;
      return (p.grad(v) + (v - x) / lam).norm() <= 0.98 * r_norm;
    };
    double alpha = 1.0;
    Vec zn = z + step;
    bool ok = acceptable(zn);
    int halvings = 0;
    while (!ok && halvings < 60) {
      alpha *= 0.5;
      zn = z + alpha * step;
      ok = acceptable(zn);
      ++halvings;
    }
    // Neither metric can register progress in any damping of a descent
    // direction: z is at the precision floor of this arithmetic.
    if (!ok) return z;
    z = zn;
    gz = subprob(z);
  }
  throw ConvergenceError("prox_numeric: iteration cap exceeded", unscaled);
}

// Grid-search oracle for prox_{lam f}(x) over a box, dim <= 3. Coarse pass
// plus `rounds - 1` refinements with a 4x finer pitch each. Every refinement
// grid is anchored so the incumbent is one of its nodes; without that anchor
// a corner-bound coordinate (solution at a kink or box face) can make all
// nodes of a finer grid lose to the incumbent and freeze the other, still
// coarse, coordinates. Deliberately independent of prox_numeric: no
// derivatives, no problem.prox, only value().
inline Vec brute_force_prox(const ProxProblem& p, const Vec& x, double lam,
                            const Vec& lo, const Vec& hi, int n_grid,
                            int rounds = 3) {
  const int n = p.dim;
  if (n < 1 || n > 3)
    throw ConfigError("brute_force_prox: dim must be 1, 2 or 3");
  if (n_grid < 100) throw ConfigError("brute_force_prox: n_grid must be >= 100");
  if (lo.size() != n || hi.size() != n || !((hi - lo).minCoeff() > 0.0))
    throw ConfigError("brute_force_prox: bad box");

  const int center = (n_grid - 1) / 2;
  Vec pitch = (hi - lo) / double(n_grid - 1);
  Vec best = 0.5 * (lo + hi);
  double best_g = kInf;
  for (int round = 0; round < rounds; ++round) {
    if (round > 0) pitch *= 4.0 / double(n_grid - 1);
    const Vec anchor = best;  // frozen: the grid must not drift mid-sweep
    std::vector<int> idx(n, 0);
    Vec z(n);
    bool done = false;
    while (!done) {
      bool inside_box = true;
      for (int i = 0; i < n; ++i) {
        if (round == 0) {
          z[i] = lo[i] + idx[i] * pitch[i];  // inside by construction
        } else {
          z[i] = anchor[i] + (idx[i] - center) * pitch[i];
          inside_box = inside_box && z[i] >= lo[i] && z[i] <= hi[i];
        }
      }
      if (inside_box && p.in_domain(z)) {
        double fz = p.value(z);
        if (std::isfinite(fz)) {
          double g = lam * fz + 0.5 * (z - x).squaredNorm();
          if (g < best_g) {
            best_g = g;
            best = z;
          }
        }
      }
      int i = 0;
      for (; i < n; ++i) {
        if (++idx[i] < n_grid) break;
        idx[i] = 0;
      }
      done = (i == n);
    }
  }
  return best;
}

}  // namespace tikhoprox
