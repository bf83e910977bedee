#pragma once

#include <string>
#include <vector>

#include "rexp/dataset.hpp"
#include "rexp/solver.hpp"

namespace rexp {

struct ReplicationOutcome {
  double ae = 0.0;           // sum_j |beta_hat_j - beta*_j|
  double se = 0.0;           // sqrt(sum_j (beta_hat_j - beta*_j)^2)
  std::size_t size = 0;      // #{j : |beta_hat_j| > zero_threshold}
  bool hit_mean_set = false; // all of {6,12,15,20} selected
  bool hit_x1 = false;       // x1 selected
  bool converged = false;
};

// One (method, alpha, distribution) cell of the aggregated report.
struct ReportCell {
  double ae_mean = 0.0, ae_sd = 0.0;
  double se_mean = 0.0, se_sd = 0.0;
  double size_mean = 0.0, size_sd = 0.0;
  std::size_t f = 0;        // count of hit_mean_set
  std::size_t f1 = 0;       // count of hit_x1
  std::size_t n_total = 0;
  std::size_t n_fail = 0;   // non-converged replications
  bool is_na = false;       // every replication failed
  bool single_sample = false;
};

ReplicationOutcome score_replication(const FitResult& fit,
                                     const GroundTruth& truth,
                                     double zero_threshold);

// Means/sds over converged outcomes (sd divisor n-1); NA iff none converged.
ReportCell aggregate(const std::vector<ReplicationOutcome>& outcomes);

struct ReportRow {
  std::string dist;
  double alpha = 0.5;
  std::string method;
  ReportCell cell;
};

void write_report_csv(const std::vector<ReportRow>& rows,
                      const std::string& path);
// Aligned text table, "mean(sd)" with 4 decimals.
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace rexp
