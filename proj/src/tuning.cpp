#include "rexp/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rexp/kernels.hpp"

namespace rexp {

void TuningGrid::validate() const {
  if (lambdas.empty() || c_upper_grid.empty() || c_lower_grid.empty())
    throw std::domain_error("tuning grid must be nonempty");
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i + 1]))
      throw std::domain_error("lambdas must be strictly increasing");
  for (double l : lambdas)
    if (!(l > 0.0)) throw std::domain_error("lambdas must be positive");
  for (double c : c_upper_grid)
    if (!(c > 0.0)) throw std::domain_error("c_upper grid must be positive");
  for (double c : c_lower_grid)
    if (!(c < 0.0)) throw std::domain_error("c_lower grid must be negative");
}

double prediction_expectile_loss(const FitResult& fit, const Dataset& tune_data,
                                 const ExpectileLevel& level) {
  tune_data.validate();
  if (fit.beta_hat.size() != tune_data.p())
    throw std::domain_error("prediction loss: dimension mismatch");
  const auto& k = kernels::active();
  const std::size_t m = tune_data.n();
  std::vector<double> r(m);
  k.residuals(tune_data.X.data(), tune_data.y.data(), fit.beta_hat.data(),
              r.data(), m, tune_data.p());
  return k.phi_sum(r.data(), m, level.alpha()) / static_cast<double>(m);
}

namespace {

// Lambda path inside one (C_u, C_l) cell, largest lambda first so warm
// starts flow from sparser to denser fits.
void run_lambda_path(const Dataset& train, const Dataset& tune_set,
                     const ExpectileLevel& level, const RobustLossSpec& loss,
                     const PenaltySpec& pen_family,
                     const std::vector<double>& lambdas, const FitConfig& cfg,
                     std::vector<TuningCell>* table,
                     std::vector<FitResult>* fits) {
  std::vector<double> warm(train.p(), 0.0);
  std::vector<TuningCell> cells;
  std::vector<FitResult> cell_fits;
  for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it) {
    const PenaltySpec pen = pen_family.with_lambda(*it);
    FitResult fit = fit_lla(train, loss, pen, cfg, warm);
    warm = fit.beta_hat;
    TuningCell cell;
    cell.lambda = *it;
    cell.c_upper = loss.c_upper();
    cell.c_lower = loss.c_lower();
    cell.tune_loss = prediction_expectile_loss(fit, tune_set, level);
    cell.converged = fit.converged;
    cell.active_size = fit.active_set.size();
    cells.push_back(cell);
    cell_fits.push_back(std::move(fit));
  }
  // Reported in increasing-lambda order regardless of fit order.
  for (std::size_t i = cells.size(); i-- > 0;) {
    table->push_back(cells[i]);
    fits->push_back(std::move(cell_fits[i]));
  }
}

TuningResult select_best(std::vector<TuningCell> table,
                         std::vector<FitResult> fits) {
  std::size_t best = table.size();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!table[i].converged) continue;
    if (best == table.size()) { best = i; continue; }
    const TuningCell& a = table[i];
    const TuningCell& b = table[best];
    if (a.tune_loss < b.tune_loss ||
        (a.tune_loss == b.tune_loss &&
         (a.lambda < b.lambda ||
          (a.lambda == b.lambda &&
           (a.c_upper > b.c_upper ||
            (a.c_upper == b.c_upper && a.c_lower < b.c_lower))))))
      best = i;
  }
  if (best == table.size()) {
    // Fall back to the unconverged argmin, keeping the table for audit.
    for (std::size_t i = 0; i < table.size(); ++i)
      if (best == table.size() || table[i].tune_loss < table[best].tune_loss)
        best = i;
  }
  if (best == table.size())
    throw std::runtime_error("tuning: empty grid table");
  TuningResult result;
  result.lambda = table[best].lambda;
  result.c_upper = table[best].c_upper;
  result.c_lower = table[best].c_lower;
  result.best_fit = std::move(fits[best]);
  result.table = std::move(table);
  return result;
}

}  // namespace

TuningResult tune(const Dataset& train, const Dataset& tune_set,
                  const ExpectileLevel& level, const PenaltySpec& pen_family,
                  const TuningGrid& grid, const FitConfig& cfg) {
  grid.validate();
  train.validate();
  tune_set.validate();
  if (train.p() != tune_set.p())
    throw std::domain_error("tune: train/tune dimension mismatch");

  std::vector<TuningCell> table;
  std::vector<FitResult> fits;
  for (double cu : grid.c_upper_grid)
    for (double cl : grid.c_lower_grid) {
      const RobustLossSpec loss(level, cu, cl);
      run_lambda_path(train, tune_set, level, loss, pen_family, grid.lambdas,
                      cfg, &table, &fits);
    }
  return select_best(std::move(table), std::move(fits));
}

TuningResult tune_untruncated(const Dataset& train, const Dataset& tune_set,
                              const ExpectileLevel& level,
                              const PenaltySpec& pen_family,
                              const std::vector<double>& lambdas,
                              const FitConfig& cfg) {
  train.validate();
  tune_set.validate();
  const RobustLossSpec loss = RobustLossSpec::untruncated(level);
  std::vector<TuningCell> table;
  std::vector<FitResult> fits;
  run_lambda_path(train, tune_set, level, loss, pen_family, lambdas, cfg,
                  &table, &fits);
  return select_best(std::move(table), std::move(fits));
}

TuningGrid default_grid(const Dataset& train, const ExpectileLevel& level,
                        std::size_t n_lambda,
                        const std::vector<double>& c_multiples) {
  train.validate();
  if (train.n() < 10) throw std::domain_error("default_grid: n must be >= 10");
  if (c_multiples.empty())
    throw std::domain_error("default_grid: empty c_multiples");

  const double base =
      std::sqrt(std::log(static_cast<double>(train.p())) /
                static_cast<double>(train.n()));

  auto mad = [](std::vector<double> v) {
    auto med = [](std::vector<double>& u) {
      std::nth_element(u.begin(), u.begin() + u.size() / 2, u.end());
      return u[u.size() / 2];
    };
    const double m = med(v);
    for (double& x : v) x = std::fabs(x - m);
    return med(v);
  };
  // 1.4826 * MAD estimates sigma under normality.
  constexpr double kMadToSigma = 1.4826;

  // Pilot Lasso at a y-scaled lambda sets the residual scale; both the
  // lambda grid and the truncation grid must track the noise level or
  // heavy-tailed cells undersmooth at every grid point.
  double sigma0 = kMadToSigma * mad(train.y);
  if (!(sigma0 > 0.0)) sigma0 = 1.0;
  FitConfig pilot_cfg;
  pilot_cfg.inner_tol = 1e-5;
  const PenaltySpec pilot_pen(PenaltyFamily::Lasso, 2.0 * base * sigma0);
  const RobustLossSpec pilot_loss = RobustLossSpec::untruncated(level);
  FitResult pilot = fit_lla(train, pilot_loss, pilot_pen, pilot_cfg);

  std::vector<double> res(train.n());
  kernels::active().residuals(train.X.data(), train.y.data(),
                              pilot.beta_hat.data(), res.data(), train.n(),
                              train.p());
  double scale = mad(res);
  if (!(scale > 0.0)) scale = mad(train.y);
  if (!(scale > 0.0)) scale = 1.0;
  const double sigma = kMadToSigma * scale;

  TuningGrid grid;
  const double lo = 0.05 * base * sigma, hi = 2.0 * base * sigma;
  grid.lambdas.resize(n_lambda);
  if (n_lambda == 1) {
    grid.lambdas[0] = hi;
  } else {
    const double step = std::log(hi / lo) / static_cast<double>(n_lambda - 1);
    for (std::size_t i = 0; i < n_lambda; ++i)
      grid.lambdas[i] = lo * std::exp(step * static_cast<double>(i));
  }

  for (double mult : c_multiples) {
    grid.c_upper_grid.push_back(mult * scale);
    grid.c_lower_grid.push_back(-mult * scale);
  }
  return grid;
}

void write_tuning_table_csv(const std::vector<TuningCell>& table,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "lambda,c_upper,c_lower,tune_loss,converged,active_size\n";
  out.precision(17);
  for (const auto& c : table)
    out << c.lambda << ',' << c.c_upper << ',' << c.c_lower << ','
        << c.tune_loss << ',' << (c.converged ? 1 : 0) << ',' << c.active_size
        << '\n';
}

}  // namespace rexp
