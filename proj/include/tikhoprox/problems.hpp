#pragma once

#include <cmath>

#include "tikhoprox/core.hpp"
#include "tikhoprox/problem.hpp"
#include "tikhoprox/prox.hpp"
#include "tikhoprox/prox_numeric.hpp"

namespace tikhoprox {

// f(x) = |x1| + ind[-a,a](x1) + (1/2)(x2 - v0)^2.  Nonsmooth, separable,
// closed-form prox; minimizer (0, v0), min value 0. `printed_y_prox` swaps in
// the sign-flipped y-update kept for comparison (see prox.hpp).
inline ProxProblem abs_box_quad_problem(double a, double v0,
                                        bool printed_y_prox = false) {
  if (!(a > 0.0)) throw ConfigError("abs_box_quad: a must be > 0");
  ProxProblem p;
  p.name = "l1box_quad";
  p.dim = 2;
  p.value = [a, v0](const Vec& x) {
    if (std::abs(x[0]) > a) return kInf;
    return std::abs(x[0]) + 0.5 * sqr(x[1] - v0);
  };
  p.value_diff = [a, v0](const Vec& x, const Vec& y) {
    if (std::abs(x[0]) > a || std::abs(y[0]) > a) {
      double fx = std::abs(x[0]) > a ? kInf : 0.0;
      double fy = std::abs(y[0]) > a ? kInf : 0.0;
      return fx - fy;  // inf semantics; both-infeasible gives nan honestly
    }
    return (std::abs(x[0]) - std::abs(y[0])) +
           0.5 * (x[1] - y[1]) * ((x[1] - v0) + (y[1] - v0));
  };
  p.prox = [a, v0, printed_y_prox](double lam, const Vec& x) {
    Vec z(2);
    z[0] = prox_abs_box(x[0], lam, a);
    z[1] = printed_y_prox ? prox_shifted_quad_printed(x[1], lam, v0)
                          : prox_shifted_quad(x[1], lam, v0);
    return z;
  };
  p.xstar = (Vec(2) << 0.0, v0).finished();
  p.fmin = 0.0;
  return p;
}

// f(x) = (1/2)(x1 + x2)^2 - ln(1 + x1) - ln(1 + x2) on the open set
// x > (-1, -1).  Smooth on its domain, no closed-form prox (prox_numeric),
// minimizer ((sqrt(3)-1)/2) * (1, 1).
inline ProxProblem log_barrier_quad_problem() {
  ProxProblem p;
  p.name = "logbarrier_quad";
  p.dim = 2;
  p.value = [](const Vec& x) {
    if (!(1.0 + x[0] > 0.0) || !(1.0 + x[1] > 0.0)) return kInf;
    return 0.5 * sqr(x[0] + x[1]) - std::log(1.0 + x[0]) - std::log(1.0 + x[1]);
  };
  p.value_diff = [](const Vec& x, const Vec& y) {
    // ln(1+x) - ln(1+y) = log1p((x-y)/(1+y)); the quadratic part in
    // half-difference-times-sum form. Exact to ulp for nearby x, y.
    double d0 = x[0] - y[0], d1 = x[1] - y[1];
    return 0.5 * (d0 + d1) * ((x[0] + x[1]) + (y[0] + y[1])) -
           std::log1p(d0 / (1.0 + y[0])) - std::log1p(d1 / (1.0 + y[1]));
  };
  p.grad = [](const Vec& x) {
    double s = x[0] + x[1];
    return (Vec(2) << s - 1.0 / (1.0 + x[0]), s - 1.0 / (1.0 + x[1]))
        .finished();
  };
  p.hess_vec = [](const Vec& x, const Vec& v) {
    double s = v[0] + v[1];
    return (Vec(2) << s + v[0] / sqr(1.0 + x[0]), s + v[1] / sqr(1.0 + x[1]))
        .finished();
  };
  p.domain_lower = (Vec(2) << -1.0, -1.0).finished();
  ProxProblem grad_only = p;  // avoid self-reference in the prox closure
  p.prox = [grad_only](double lam, const Vec& x) {
    return prox_numeric(grad_only, x, lam);
  };
  double r = 0.5 * (std::sqrt(3.0) - 1.0);
  p.xstar = (Vec(2) << r, r).finished();
  p.fmin = p.value(*p.xstar);
  return p;
}

// f(x) = (1/2)(x - b)' Q (x - b) for SPD Q.  Closed-form prox via one SPD
// solve; minimizer b, min value 0.
inline ProxProblem quadratic_problem(const Mat& Q, const Vec& b) {
  const int n = int(Q.rows());
  if (Q.cols() != n || b.size() != n)
    throw ConfigError("quadratic_problem: dimension mismatch");
  ProxProblem p;
  p.name = "quad";
  p.dim = n;
  p.value = [Q, b](const Vec& x) {
    Vec d = x - b;
    return 0.5 * d.dot(Q * d);
  };
  p.value_diff = [Q, b](const Vec& x, const Vec& y) {
    return 0.5 * (x - y).dot(Q * ((x - b) + (y - b)));
  };
  p.grad = [Q, b](const Vec& x) { return Vec(Q * (x - b)); };
  p.hess_vec = [Q](const Vec&, const Vec& v) { return Vec(Q * v); };
  p.prox = [Q, b, n](double lam, const Vec& x) {
    Mat A = lam * Q;
    A.diagonal().array() += 1.0;
    Vec w = A.ldlt().solve(Vec(x - b));
    return Vec(b + w);
  };
  p.xstar = b;
  p.fmin = 0.0;
  p.lipschitz_grad =
      Eigen::SelfAdjointEigenSolver<Mat>(Q).eigenvalues().maxCoeff();
  return p;
}

// Diagonal quadratic with geometrically spaced eigenvalues 1..condition and
// minimizer 0; the stock ill-conditioned smooth benchmark.
inline ProxProblem quad_nd_problem(int n, double condition) {
  if (n < 1) throw ConfigError("quad_nd: n must be >= 1");
  if (!(condition >= 1.0)) throw ConfigError("quad_nd: condition must be >= 1");
  Vec eig(n);
  for (int i = 0; i < n; ++i)
    eig[i] = n == 1 ? condition
                    : std::pow(condition, double(i) / double(n - 1));
  ProxProblem p = quadratic_problem(Mat(eig.asDiagonal()), Vec::Zero(n));
  p.name = "quad_nd";
  p.lipschitz_grad = condition;  // exact; spare the eigensolver rounding
  return p;
}

}  // namespace tikhoprox
