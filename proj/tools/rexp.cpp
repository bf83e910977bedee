#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rexp/datagen.hpp"
#include "rexp/experiment.hpp"
#include "rexp/solver.hpp"
#include "rexp/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_simulate(const std::string& dist, std::size_t n, std::size_t p,
                 double rho, double hetero_scale, std::uint64_t seed,
                 const std::string& out_dir) {
  rexp::SimulationSpec spec;
  spec.n = n;
  spec.p = p;
  spec.rho = rho;
  spec.hetero_scale = hetero_scale;
  spec.error_dist = rexp::error_dist_from_name(dist);
  spec.seed = seed;
  spec.validate();

  fs::create_directories(out_dir);
  rexp::Dataset data = rexp::generate(spec);
  rexp::write_dataset_csv(data, out_dir + "/data.csv");

  json meta;
  meta["n"] = spec.n;
  meta["p"] = spec.p;
  meta["rho"] = spec.rho;
  meta["error_dist"] = dist;
  meta["hetero_scale"] = spec.hetero_scale;
  meta["seed"] = spec.seed;
  if (data.truth) {
    meta["true_active_set_1based"] = json::array();
    for (std::size_t j : data.truth->active_set)
      meta["true_active_set_1based"].push_back(j + 1);
    meta["true_beta_nonzero"] = json::object();
    for (std::size_t j : data.truth->active_set)
      meta["true_beta_nonzero"]["x" + std::to_string(j + 1)] =
          data.truth->beta_star[j];
  }
  std::ofstream mf(out_dir + "/meta.json");
  mf << meta.dump(2) << '\n';

  std::cout << "wrote " << out_dir << "/data.csv (" << spec.n << " rows, "
            << spec.p << " covariates)\n";
  std::cout << "ground truth (alpha=0.5): ones at x6,x12,x15,x20\n";
  return 0;
}

int cmd_fit(const std::string& data_path, double alpha,
            const std::string& penalty, double lambda, double scad_a,
            double mcp_b, double cu, double cl, std::size_t lla_steps,
            const std::string& out_path) {
  rexp::Dataset data = rexp::read_dataset_csv(data_path);
  rexp::ExpectileLevel level(alpha);

  rexp::PenaltyFamily fam;
  double shape = 0.0;
  if (penalty == "scad") { fam = rexp::PenaltyFamily::Scad; shape = scad_a; }
  else if (penalty == "mcp") { fam = rexp::PenaltyFamily::Mcp; shape = mcp_b; }
  else if (penalty == "lasso") fam = rexp::PenaltyFamily::Lasso;
  else throw CLI::ValidationError("--penalty must be scad|mcp|lasso");
  rexp::PenaltySpec pen(fam, lambda, shape);

  rexp::FitConfig cfg;
  cfg.lla_max_steps = lla_steps;
  rexp::FitResult fit;
  if (std::isinf(cu)) {
    fit = rexp::fit_escad(data, level, pen, cfg);
  } else {
    rexp::RobustLossSpec loss(level, cu, cl);
    fit = rexp::fit_lla(data, loss, pen, cfg);
  }

  std::ofstream out(out_path);
  out.precision(17);
  out << "index,value\n";
  for (std::size_t j : fit.active_set)
    out << (j + 1) << ',' << fit.beta_hat[j] << '\n';

  std::printf("objective            %.10g\n", fit.objective);
  std::printf("active set size      %zu\n", fit.active_set.size());
  std::printf("lla steps            %zu\n", fit.lla_steps);
  std::printf("inner iterations     %zu\n", fit.inner_iters_total);
  std::printf("stationarity resid   %.3e\n", fit.stationarity_residual);
  std::printf("l1 norm              %.6g\n", fit.l1_norm);
  std::printf("converged            %s\n", fit.converged ? "yes" : "no");
  return fit.converged ? 0 : 1;
}

int cmd_tune(const std::string& train_path, const std::string& tune_path,
             double alpha, std::size_t n_lambda, const std::string& out_path) {
  rexp::Dataset train = rexp::read_dataset_csv(train_path);
  rexp::Dataset tune_set = rexp::read_dataset_csv(tune_path);
  rexp::ExpectileLevel level(alpha);
  rexp::PenaltySpec pen(rexp::PenaltyFamily::Scad, 1.0);
  rexp::FitConfig cfg;
  auto grid = rexp::default_grid(train, level, n_lambda);
  auto result = rexp::tune(train, tune_set, level, pen, grid, cfg);
  rexp::write_tuning_table_csv(result.table, out_path);
  std::printf("selected lambda=%.6g c_upper=%.6g c_lower=%.6g\n",
              result.lambda, result.c_upper, result.c_lower);
  std::printf("tuning table written to %s (%zu cells)\n", out_path.c_str(),
              result.table.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse robust expectile regression toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a simulated dataset");
  std::string sim_dist = "normal", sim_out = ".";
  std::size_t sim_n = 300, sim_p = 400;
  double sim_rho = 0.5, sim_scale = 0.70;
  std::uint64_t sim_seed = 0;
  sim->add_option("--dist", sim_dist, "normal|t3|lognormal|weibull");
  sim->add_option("--n", sim_n, "sample size");
  sim->add_option("--p", sim_p, "dimension (>= 20)");
  sim->add_option("--rho", sim_rho, "AR(1) correlation");
  sim->add_option("--hetero-scale", sim_scale, "noise scale on x1");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--out", sim_out, "output directory");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a single penalized model");
  std::string fit_data, fit_penalty = "scad", fit_out = "coefficients.csv";
  double fit_alpha = 0.5, fit_lambda = 0.1, fit_a = 3.7, fit_b = 2.0;
  double fit_cu = std::numeric_limits<double>::infinity();
  double fit_cl = -std::numeric_limits<double>::infinity();
  std::size_t fit_lla = 10;
  fit->add_option("data", fit_data, "dataset CSV")->required();
  fit->add_option("--alpha", fit_alpha, "expectile level");
  fit->add_option("--penalty", fit_penalty, "scad|mcp|lasso");
  fit->add_option("--lambda", fit_lambda, "penalty strength");
  fit->add_option("--scad-a", fit_a, "SCAD shape");
  fit->add_option("--mcp-b", fit_b, "MCP shape");
  fit->add_option("--cu", fit_cu, "upper truncation (omit for untruncated)");
  fit->add_option("--cl", fit_cl, "lower truncation (negative)");
  fit->add_option("--lla-steps", fit_lla, "max LLA steps");
  fit->add_option("--out", fit_out, "coefficient CSV path");

  // tune
  auto* tun = app.add_subcommand("tune", "Grid search over (lambda, C_u, C_l)");
  std::string tune_train, tune_tune, tune_out = "tuning_table.csv";
  double tune_alpha = 0.5;
  std::size_t tune_nl = 20;
  tun->add_option("train", tune_train, "training CSV")->required();
  tun->add_option("tune", tune_tune, "tuning-set CSV")->required();
  tun->add_option("--alpha", tune_alpha, "expectile level");
  tun->add_option("--n-lambda", tune_nl, "lambda grid size");
  tun->add_option("--out", tune_out, "tuning table CSV path");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a simulation experiment");
  std::string exp_config;
  std::size_t exp_jobs = 0;
  std::string exp_out;
  bool exp_curves = false;
  exp->add_option("config", exp_config, "JSON config path")->required();
  exp->add_option("--jobs", exp_jobs, "worker count (0 = auto)");
  exp->add_option("--out", exp_out, "output directory override");
  exp->add_flag("--emit-loss-curves", exp_curves, "also write loss_curves.csv");

  // loss-curves
  auto* lc = app.add_subcommand("loss-curves", "Emit psi/phi plot data");
  double lc_alpha = 0.25, lc_cu = 2.0, lc_cl = -1.0;
  std::string lc_out = "loss_curves.csv";
  lc->add_option("--alpha", lc_alpha, "expectile level");
  lc->add_option("--cu", lc_cu, "upper truncation");
  lc->add_option("--cl", lc_cl, "lower truncation");
  lc->add_option("--out", lc_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_dist, sim_n, sim_p, sim_rho, sim_scale, sim_seed,
                          sim_out);
    if (fit->parsed())
      return cmd_fit(fit_data, fit_alpha, fit_penalty, fit_lambda, fit_a,
                     fit_b, fit_cu, fit_cl, fit_lla, fit_out);
    if (tun->parsed())
      return cmd_tune(tune_train, tune_tune, tune_alpha, tune_nl, tune_out);
    if (exp->parsed()) {
      auto cfg = rexp::load_experiment_config(exp_config);
      if (exp_jobs != 0) cfg.jobs = exp_jobs;
      if (!exp_out.empty()) cfg.out_dir = exp_out;
      if (exp_curves) cfg.emit_loss_curves = true;
      auto result = rexp::run_experiment(cfg);
      rexp::write_experiment_outputs(cfg, result);
      std::cout << result.table_text;
      return 0;
    }
    if (lc->parsed()) {
      rexp::RobustLossSpec spec(rexp::ExpectileLevel(lc_alpha), lc_cu, lc_cl);
      rexp::write_loss_curves_csv(spec, lc_out);
      std::cout << "wrote " << lc_out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
