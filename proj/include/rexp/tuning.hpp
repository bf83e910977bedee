#pragma once

#include <string>
#include <vector>

#include "rexp/dataset.hpp"
#include "rexp/loss.hpp"
#include "rexp/penalty.hpp"
#include "rexp/solver.hpp"

namespace rexp {

struct TuningGrid {
  std::vector<double> lambdas;        // strictly increasing, positive
  std::vector<double> c_upper_grid;   // positive
  std::vector<double> c_lower_grid;   // negative
  std::size_t tuning_multiple = 10;

  void validate() const;
};

struct TuningCell {
  double lambda = 0.0;
  double c_upper = 0.0;
  double c_lower = 0.0;
  double tune_loss = 0.0;
  bool converged = false;
  std::size_t active_size = 0;
};

struct TuningResult {
  double lambda = 0.0;
  double c_upper = 0.0;
  double c_lower = 0.0;
  FitResult best_fit;
  std::vector<TuningCell> table;
};

// (1/m) sum phi_alpha(y_i - x_i'beta) on the tuning set; the selection
// criterion is the target loss, not the truncated surrogate.
double prediction_expectile_loss(const FitResult& fit, const Dataset& tune_data,
                                 const ExpectileLevel& level);

// Grid search over (lambda, C_u, C_l): fits on train (warm-started along
// the lambda path within each (C_u, C_l) cell), scores on tune_set.
// Tie-break: smallest lambda, then largest C_u, then largest |C_l|.
TuningResult tune(const Dataset& train, const Dataset& tune_set,
                  const ExpectileLevel& level, const PenaltySpec& pen_family,
                  const TuningGrid& grid, const FitConfig& cfg);

// Untruncated comparator: the same protocol restricted to the lambda axis.
TuningResult tune_untruncated(const Dataset& train, const Dataset& tune_set,
                              const ExpectileLevel& level,
                              const PenaltySpec& pen_family,
                              const std::vector<double>& lambdas,
                              const FitConfig& cfg);

// lambda: log-spaced on [0.05, 2]*sqrt(log p / n); C grids scaled by the
// MAD of pilot-Lasso residuals (largest multiple ~ untruncated).
TuningGrid default_grid(const Dataset& train, const ExpectileLevel& level,
                        std::size_t n_lambda = 20,
                        const std::vector<double>& c_multiples = {
                            1.0, 2.0, 4.0, 8.0, 16.0, 1e6});

void write_tuning_table_csv(const std::vector<TuningCell>& table,
                            const std::string& path);

}  // namespace rexp
