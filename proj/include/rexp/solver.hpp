#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rexp/dataset.hpp"
#include "rexp/loss.hpp"
#include "rexp/penalty.hpp"

namespace rexp {

struct FitConfig {
  double inner_tol = 1e-7;        // relative objective-change stop
  std::size_t inner_max_iter = 5000;
  std::size_t lla_max_steps = 10;
  double zero_threshold = 1e-8;
  double step_shrink = 0.5;       // backtracking shrink factor
  std::size_t max_backtracks = 60;
  double kkt_tol = 0.0;           // extra gradient-mapping stop; 0 disables

  void validate() const {
    if (!(inner_tol > 0.0)) throw std::domain_error("inner_tol must be > 0");
    if (!(zero_threshold > 0.0))
      throw std::domain_error("zero_threshold must be > 0");
    if (!(step_shrink > 0.0 && step_shrink < 1.0))
      throw std::domain_error("step_shrink must lie in (0,1)");
  }
};

struct FitResult {
  std::vector<double> beta_hat;
  std::vector<std::size_t> active_set;  // {j : |beta_j| > zero_threshold}
  double objective = 0.0;
  std::size_t lla_steps = 0;
  std::size_t inner_iters_total = 0;
  bool converged = false;
  double stationarity_residual = 0.0;
  double l1_norm = 0.0;  // post-hoc feasibility diagnostic
};

// (1/n) sum psi(y_i - x_i'beta) + sum_j P_lambda(|beta_j|)
double objective(const Dataset& data, const RobustLossSpec& loss,
                 const PenaltySpec& pen, std::span<const double> beta);

// Gradient of the smooth part: -(1/n) sum psi'(y_i - x_i'beta) x_i
std::vector<double> smooth_gradient(const Dataset& data,
                                    const RobustLossSpec& loss,
                                    std::span<const double> beta);

// Elementwise soft-threshold with per-coordinate weights.
std::vector<double> prox_weighted_l1(std::span<const double> v, double step,
                                     std::span<const double> weights);

// Proximal gradient with backtracking on the weighted-L1 subproblem;
// statistics accumulated into `stats` when provided.
std::vector<double> solve_weighted_l1(const Dataset& data,
                                      const RobustLossSpec& loss,
                                      std::span<const double> weights,
                                      const FitConfig& cfg,
                                      std::span<const double> warm_start,
                                      FitResult* stats = nullptr);

// Adaptive LLA outer loop over the folded-concave penalty.
FitResult fit_lla(const Dataset& data, const RobustLossSpec& loss,
                  const PenaltySpec& pen, const FitConfig& cfg,
                  std::span<const double> beta0 = {});

// Untruncated-loss comparator: same pipeline with phi in place of psi.
FitResult fit_escad(const Dataset& data, const ExpectileLevel& level,
                    const PenaltySpec& pen, const FitConfig& cfg,
                    std::span<const double> beta0 = {});

// Unpenalized robust fit restricted to `active`, zeros elsewhere.
FitResult fit_oracle(const Dataset& data, const RobustLossSpec& loss,
                     std::span<const std::size_t> active,
                     const FitConfig& cfg);

// Max KKT violation of the first-order condition at beta.
double stationarity_residual(const Dataset& data, const RobustLossSpec& loss,
                             const PenaltySpec& pen,
                             std::span<const double> beta,
                             double zero_threshold);

// 2*max(alpha,1-alpha)*lambda_max(X'X/n) by power iteration (100 iters).
double smooth_lipschitz(const Dataset& data, const RobustLossSpec& loss);

}  // namespace rexp
