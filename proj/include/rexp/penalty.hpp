#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace rexp {

enum class PenaltyFamily { Scad, Mcp, Lasso };

// Folded-concave penalty family: SCAD (shape a > 2), MCP (shape b > 0)
// and the Lasso as the convex limit. Exposes the subderivative limit L
// at 0+ and the weak-convexity constant mu.
class PenaltySpec {
 public:
  PenaltySpec(PenaltyFamily family, double lambda, double shape = 0.0)
      : family_(family), lambda_(lambda), shape_(shape) {
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be >= 0");
    switch (family) {
      case PenaltyFamily::Scad:
        if (shape == 0.0) shape_ = kScadDefaultShape;
        if (!(shape_ > 2.0)) throw std::domain_error("SCAD requires a > 2");
        break;
      case PenaltyFamily::Mcp:
        if (shape == 0.0) shape_ = kMcpDefaultShape;
        if (!(shape_ > 0.0)) throw std::domain_error("MCP requires b > 0");
        break;
      case PenaltyFamily::Lasso:
        shape_ = 0.0;
        break;
    }
  }

  static constexpr double kScadDefaultShape = 3.7;
  static constexpr double kMcpDefaultShape = 2.0;

  PenaltyFamily family() const { return family_; }
  double lambda() const { return lambda_; }
  double shape() const { return shape_; }
  double subderiv_limit() const { return 1.0; }  // L = 1 for all families
  double weak_convexity() const {
    switch (family_) {
      case PenaltyFamily::Scad: return 1.0 / (shape_ - 1.0);
      case PenaltyFamily::Mcp: return 1.0 / shape_;
      case PenaltyFamily::Lasso: return 0.0;
    }
    return 0.0;
  }

  PenaltySpec with_lambda(double lambda) const {
    return PenaltySpec(family_, lambda, family_ == PenaltyFamily::Lasso
                                            ? 0.0
                                            : shape_);
  }

 private:
  PenaltyFamily family_;
  double lambda_;
  double shape_;
};

// P_lambda(|t|)
inline double penalty_value(const PenaltySpec& spec, double t) {
  if (!std::isfinite(t)) throw std::domain_error("non-finite argument");
  const double th = std::fabs(t);
  const double lam = spec.lambda();
  switch (spec.family()) {
    case PenaltyFamily::Lasso:
      return lam * th;
    case PenaltyFamily::Scad: {
      const double a = spec.shape();
      if (th <= lam) return lam * th;
      if (th <= a * lam)
        return (a * lam * th - 0.5 * (th * th + lam * lam)) / (a - 1.0);
      return 0.5 * (a + 1.0) * lam * lam;
    }
    case PenaltyFamily::Mcp: {
      const double b = spec.shape();
      if (th <= b * lam) return lam * th - th * th / (2.0 * b);
      return 0.5 * b * lam * lam;
    }
  }
  return 0.0;
}

// P'_lambda(t) for t >= 0; at t = 0 the right limit lambda*L.
inline double penalty_deriv(const PenaltySpec& spec, double t) {
  if (!(t >= 0.0)) throw std::domain_error("penalty_deriv needs t >= 0");
  const double lam = spec.lambda();
  switch (spec.family()) {
    case PenaltyFamily::Lasso:
      return lam;
    case PenaltyFamily::Scad: {
      const double a = spec.shape();
      if (t <= lam) return lam;
      return std::fmax(a * lam - t, 0.0) / (a - 1.0);
    }
    case PenaltyFamily::Mcp:
      return std::fmax(lam - t / spec.shape(), 0.0);
  }
  return 0.0;
}

inline double total_penalty(const PenaltySpec& spec,
                            std::span<const double> beta) {
  double acc = 0.0;
  for (double b : beta) acc += penalty_value(spec, b);
  return acc;
}

}  // namespace rexp
