#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rexp/datagen.hpp"
#include "rexp/metrics.hpp"
#include "rexp/solver.hpp"
#include "rexp/tuning.hpp"

namespace rexp {

enum class Method { ReScad, EScad, Oracle };
const char* method_name(Method m);

struct ExperimentConfig {
  std::vector<ErrorDist> distributions = {ErrorDist::Normal};
  std::vector<double> alphas = {0.10, 0.50, 0.90};
  std::vector<Method> methods = {Method::ReScad, Method::EScad, Method::Oracle};
  std::size_t n = 300;
  std::size_t p = 400;
  std::size_t replications = 20;
  std::uint64_t master_seed = 1;
  std::size_t n_lambda = 20;
  std::vector<double> c_multiples = {1.0, 2.0, 4.0, 8.0, 16.0, 1e6};
  std::size_t tuning_multiple = 10;
  std::size_t jobs = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
  bool emit_loss_curves = false;
  FitConfig fit;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Stationarity diagnostics for converged fits (residual vs the gradient
// scale max_j |g_j| at beta = 0 on the same data).
struct StationarityRecord {
  double residual = 0.0;
  double grad_scale = 0.0;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  std::vector<StationarityRecord> stationarity;
  std::string table_text;
};

// Full protocol: per (dist, alpha, method) cell and replication, generate
// train and 10n tuning data on dedicated substreams, tune, fit, score
// against the level-dependent truth. Oracle reuses the RE-SCAD-tuned
// (C_u, C_l) of the same replication.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Writes report.csv, report.txt and optional loss_curves.csv to out_dir.
void write_experiment_outputs(const ExperimentConfig& cfg,
                              const ExperimentResult& result);

// Fig-style plot data for psi/phi over a residual grid.
void write_loss_curves_csv(const RobustLossSpec& spec, const std::string& path,
                           double r_min = -5.0, double r_max = 5.0,
                           std::size_t points = 1001);

}  // namespace rexp
