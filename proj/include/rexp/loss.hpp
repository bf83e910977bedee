#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace rexp {

// Expectile level alpha in (0,1); 1/2 recovers the mean.
class ExpectileLevel {
 public:
  explicit ExpectileLevel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::domain_error("expectile level must lie in (0,1)");
  }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
};

// Asymmetric square loss with upper/lower linearization points C_u > 0,
// C_l < 0. Infinite bounds give the untruncated loss (phi itself).
class RobustLossSpec {
 public:
  RobustLossSpec(ExpectileLevel level, double c_upper, double c_lower)
      : level_(level), c_upper_(c_upper), c_lower_(c_lower) {
    if (!(c_upper > 0.0) || std::isnan(c_upper))
      throw std::domain_error("c_upper must be positive");
    if (!(c_lower < 0.0) || std::isnan(c_lower))
      throw std::domain_error("c_lower must be negative");
  }

  static RobustLossSpec untruncated(ExpectileLevel level) {
    const double inf = std::numeric_limits<double>::infinity();
    return RobustLossSpec(level, inf, -inf);
  }

  const ExpectileLevel& level() const { return level_; }
  double alpha() const { return level_.alpha(); }
  double c_upper() const { return c_upper_; }
  double c_lower() const { return c_lower_; }
  double c_min() const { return std::fmin(c_upper_, -c_lower_); }
  double c_max() const { return std::fmax(c_upper_, -c_lower_); }
  bool is_truncated() const { return std::isfinite(c_max()); }

 private:
  ExpectileLevel level_;
  double c_upper_;
  double c_lower_;
};

namespace detail {
inline void check_finite(double r) {
  if (!std::isfinite(r)) throw std::domain_error("non-finite residual");
}
}  // namespace detail

// phi_alpha(r) = |alpha - 1(r<0)| r^2
inline double phi(const ExpectileLevel& level, double r) {
  detail::check_finite(r);
  const double a = level.alpha();
  return (r >= 0.0 ? a : 1.0 - a) * r * r;
}

inline double phi_deriv(const ExpectileLevel& level, double r) {
  detail::check_finite(r);
  const double a = level.alpha();
  return 2.0 * (r >= 0.0 ? a : 1.0 - a) * r;
}

// Four-branch robust loss; saturated branches take the closed endpoints.
inline double psi(const RobustLossSpec& spec, double r) {
  detail::check_finite(r);
  const double a = spec.alpha();
  const double cu = spec.c_upper();
  const double cl = spec.c_lower();
  if (r >= cu) return 2.0 * a * cu * r - a * cu * cu;
  if (r >= 0.0) return a * r * r;
  if (r > cl) return (1.0 - a) * r * r;
  return 2.0 * (1.0 - a) * cl * r - (1.0 - a) * cl * cl;
}

inline double psi_deriv(const RobustLossSpec& spec, double r) {
  detail::check_finite(r);
  const double a = spec.alpha();
  const double cu = spec.c_upper();
  const double cl = spec.c_lower();
  if (r >= cu) return 2.0 * a * cu;
  if (r >= 0.0) return 2.0 * a * r;
  if (r > cl) return 2.0 * (1.0 - a) * r;
  return 2.0 * (1.0 - a) * cl;
}

// g_alpha(r) = phi(r) - psi(r), nonzero only past the truncation points.
inline double truncation_gap(const RobustLossSpec& spec, double r) {
  detail::check_finite(r);
  const double a = spec.alpha();
  if (r >= spec.c_upper()) {
    const double d = r - spec.c_upper();
    return a * d * d;
  }
  if (r <= spec.c_lower()) {
    const double d = r - spec.c_lower();
    return (1.0 - a) * d * d;
  }
  return 0.0;
}

// Minimizer of sum_i phi_alpha(v_i - m): bracketed Newton on the strictly
// decreasing piecewise-linear h(m) = sum |alpha - 1(v_i < m)| (v_i - m),
// with bisection fallback when a step leaves [min v, max v].
double sample_expectile(std::span<const double> values,
                        const ExpectileLevel& level, double tol = 1e-10);

}  // namespace rexp
