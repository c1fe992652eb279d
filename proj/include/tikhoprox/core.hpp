#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tikhoprox {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Thrown when an operator is queried outside its stated domain
// (e.g. a schedule evaluated below its start time).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Thrown by iterative kernels that hit their iteration cap. Carries the
// residual reached so callers can decide whether "close" is close enough.
struct ConvergenceError : std::runtime_error {
  double residual;
  ConvergenceError(const std::string& what, double res)
      : std::runtime_error(what + " (residual " + std::to_string(res) + ")"),
        residual(res) {}
};

// Bad user-supplied configuration (parameter out of range, malformed spec).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline double sqr(double v) { return v * v; }

// x - y evaluated pairwise; kept as a named helper so difference-stable
// formulas read as intended at call sites.
inline Vec diff(const Vec& x, const Vec& y) { return x - y; }

// ||x||^2 - ||y||^2 without forming the squares: (x-y).(x+y).
// The naive form loses all digits once the norms agree to ~8 digits.
inline double norm_sq_diff(const Vec& x, const Vec& y) {
  return (x - y).dot(x + y);
}

}  // namespace tikhoprox
