#include "rexp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "rexp/kernels.hpp"

namespace rexp {
namespace {

kernels::LossParams loss_params(const RobustLossSpec& loss) {
  return {loss.alpha(), loss.c_upper(), loss.c_lower()};
}

void check_dims(const Dataset& data, std::span<const double> beta) {
  data.validate();
  if (beta.size() != data.p())
    throw std::domain_error("beta length does not match p");
}

// Smooth empirical loss at beta, residuals written into r.
double smooth_loss(const Dataset& data, const RobustLossSpec& loss,
                   std::span<const double> beta, std::vector<double>& r) {
  const auto& k = kernels::active();
  r.resize(data.n());
  k.residuals(data.X.data(), data.y.data(), beta.data(), r.data(), data.n(),
              data.p());
  return k.psi_sum(r.data(), data.n(), loss_params(loss)) /
         static_cast<double>(data.n());
}

void active_set_of(std::span<const double> beta, double zero_threshold,
                   std::vector<std::size_t>* out) {
  out->clear();
  for (std::size_t j = 0; j < beta.size(); ++j)
    if (std::fabs(beta[j]) > zero_threshold) out->push_back(j);
}

}  // namespace

double objective(const Dataset& data, const RobustLossSpec& loss,
                 const PenaltySpec& pen, std::span<const double> beta) {
  check_dims(data, beta);
  std::vector<double> r;
  return smooth_loss(data, loss, beta, r) + total_penalty(pen, beta);
}

std::vector<double> smooth_gradient(const Dataset& data,
                                    const RobustLossSpec& loss,
                                    std::span<const double> beta) {
  check_dims(data, beta);
  const auto& k = kernels::active();
  std::vector<double> r(data.n()), w(data.n()), g(data.p());
  k.residuals(data.X.data(), data.y.data(), beta.data(), r.data(), data.n(),
              data.p());
  k.psi_deriv_vec(r.data(), w.data(), data.n(), loss_params(loss));
  k.weighted_colsum_neg(data.X.data(), w.data(), g.data(), data.n(), data.p());
  return g;
}

std::vector<double> prox_weighted_l1(std::span<const double> v, double step,
                                     std::span<const double> weights) {
  if (v.size() != weights.size())
    throw std::domain_error("prox_weighted_l1: length mismatch");
  if (!(step > 0.0)) throw std::domain_error("prox_weighted_l1: step <= 0");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::domain_error("prox_weighted_l1: negative weight");
  std::vector<double> out(v.size());
  kernels::active().soft_threshold(v.data(), weights.data(), step, out.data(),
                                   v.size());
  return out;
}

double smooth_lipschitz(const Dataset& data, const RobustLossSpec& loss) {
  const auto& k = kernels::active();
  const std::size_t n = data.n(), p = data.p();
  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> u(n), w(p), zero(n, 0.0);
  double lam = 0.0;
  for (int it = 0; it < 100; ++it) {
    // u = X v  (residuals kernel with y = 0 gives -Xv)
    k.residuals(data.X.data(), zero.data(), v.data(), u.data(), n, p);
    // w = (1/n) X'u ; weighted_colsum_neg supplies -(1/n)X'(-Xv) = (1/n)X'Xv
    k.weighted_colsum_neg(data.X.data(), u.data(), w.data(), n, p);
    double norm = std::sqrt(k.dot(w.data(), w.data(), p));
    if (norm == 0.0) { lam = 0.0; break; }
    lam = norm;
    for (std::size_t j = 0; j < p; ++j) v[j] = w[j] / norm;
  }
  const double a = loss.alpha();
  return 2.0 * std::fmax(a, 1.0 - a) * lam;
}

std::vector<double> solve_weighted_l1(const Dataset& data,
                                      const RobustLossSpec& loss,
                                      std::span<const double> weights,
                                      const FitConfig& cfg,
                                      std::span<const double> warm_start,
                                      FitResult* stats) {
  check_dims(data, weights);
  cfg.validate();
  const auto& k = kernels::active();
  const std::size_t n = data.n(), p = data.p();

  std::vector<double> beta(p, 0.0);
  if (!warm_start.empty()) {
    if (warm_start.size() != p)
      throw std::domain_error("warm_start length mismatch");
    beta.assign(warm_start.begin(), warm_start.end());
  }

  const double lhat = smooth_lipschitz(data, loss);
  const double step0 = lhat > 0.0 ? 1.0 / lhat : 1.0;

  std::vector<double> r, grad(p), w(n), cand, rc;
  double f = smooth_loss(data, loss, beta, r);
  double penal = 0.0;
  for (std::size_t j = 0; j < p; ++j) penal += weights[j] * std::fabs(beta[j]);
  double obj = f + penal;

  bool converged = false;
  std::size_t iters = 0;
  for (; iters < cfg.inner_max_iter; ++iters) {
    k.psi_deriv_vec(r.data(), w.data(), n, loss_params(loss));
    k.weighted_colsum_neg(data.X.data(), w.data(), grad.data(), n, p);

    double step = step0;
    double f_cand = 0.0;
    for (std::size_t bt = 0;; ++bt) {
      cand.resize(p);
      for (std::size_t j = 0; j < p; ++j) cand[j] = beta[j] - step * grad[j];
      k.soft_threshold(cand.data(), weights.data(), step, cand.data(), p);
      f_cand = smooth_loss(data, loss, cand, rc);
      double lin = 0.0, quad = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        const double d = cand[j] - beta[j];
        lin += grad[j] * d;
        quad += d * d;
      }
      if (f_cand <= f + lin + quad / (2.0 * step) + 1e-12) break;
      if (bt >= cfg.max_backtracks) break;
      step *= cfg.step_shrink;
    }

    double penal_cand = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      penal_cand += weights[j] * std::fabs(cand[j]);
    const double obj_cand = f_cand + penal_cand;

    double max_disp = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      max_disp = std::fmax(max_disp, std::fabs(cand[j] - beta[j]));

    beta.swap(cand);
    r.swap(rc);
    f = f_cand;
    const double prev = obj;
    obj = obj_cand;
    const bool obj_flat =
        std::fabs(prev - obj) <= cfg.inner_tol * std::fmax(1.0, std::fabs(prev));
    // The gradient-mapping norm bounds the KKT residual at the new iterate;
    // when kkt_tol is set, require it as well so large objectives cannot
    // saturate the relative-change test early.
    const bool mapping_small = cfg.kkt_tol <= 0.0 || max_disp / step <= cfg.kkt_tol;
    if (obj_flat && mapping_small) {
      converged = true;
      ++iters;
      break;
    }
  }

  if (stats != nullptr) {
    stats->inner_iters_total += iters;
    stats->converged = converged;
  }
  return beta;
}

FitResult fit_lla(const Dataset& data, const RobustLossSpec& loss,
                  const PenaltySpec& pen, const FitConfig& cfg,
                  std::span<const double> beta0) {
  data.validate();
  if (!beta0.empty() && beta0.size() != data.p())
    throw std::domain_error("beta0 length does not match p");
  cfg.validate();
  const std::size_t p = data.p();

  std::vector<double> beta(p, 0.0);
  if (!beta0.empty()) beta.assign(beta0.begin(), beta0.end());

  FitResult result;
  result.inner_iters_total = 0;
  std::vector<double> weights(p);
  std::vector<std::size_t> prev_active, cur_active;
  active_set_of(beta, cfg.zero_threshold, &prev_active);

  bool all_inner_converged = true;
  std::vector<double> prev_weights;
  std::size_t steps = 0;
  for (; steps < cfg.lla_max_steps; ++steps) {
    for (std::size_t j = 0; j < p; ++j)
      weights[j] = penalty_deriv(pen, std::fabs(beta[j]));
    // Unchanged weights mean an identical subproblem whose solution we
    // already hold; re-solving would only polish within inner_tol.
    if (steps > 0 && weights == prev_weights) break;
    prev_weights = weights;

    FitResult inner_stats;
    auto next = solve_weighted_l1(data, loss, weights, cfg, beta, &inner_stats);
    result.inner_iters_total += inner_stats.inner_iters_total;
    all_inner_converged = all_inner_converged && inner_stats.converged;

    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j)
      max_change = std::fmax(max_change, std::fabs(next[j] - beta[j]));
    beta.swap(next);
    active_set_of(beta, cfg.zero_threshold, &cur_active);
    const bool stable =
        cur_active == prev_active && max_change < cfg.inner_tol;
    prev_active = cur_active;
    if (stable) {
      ++steps;
      break;
    }
  }

  result.beta_hat = std::move(beta);
  result.lla_steps = steps;
  result.converged = all_inner_converged;
  result.objective = objective(data, loss, pen, result.beta_hat);
  active_set_of(result.beta_hat, cfg.zero_threshold, &result.active_set);
  result.stationarity_residual = stationarity_residual(
      data, loss, pen, result.beta_hat, cfg.zero_threshold);
  result.l1_norm = 0.0;
  for (double b : result.beta_hat) result.l1_norm += std::fabs(b);
  return result;
}

FitResult fit_escad(const Dataset& data, const ExpectileLevel& level,
                    const PenaltySpec& pen, const FitConfig& cfg,
                    std::span<const double> beta0) {
  return fit_lla(data, RobustLossSpec::untruncated(level), pen, cfg, beta0);
}

FitResult fit_oracle(const Dataset& data, const RobustLossSpec& loss,
                     std::span<const std::size_t> active,
                     const FitConfig& cfg) {
  data.validate();
  cfg.validate();
  if (active.empty()) throw std::domain_error("fit_oracle: empty active set");
  for (std::size_t j : active)
    if (j >= data.p()) throw std::domain_error("fit_oracle: index out of range");

  const std::size_t n = data.n(), q = active.size();
  Dataset sub;
  sub.X = Matrix(n, q);
  sub.y = data.y;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < q; ++j) sub.X(i, j) = data.X(i, active[j]);

  const auto& k = kernels::active();
  const double lhat = smooth_lipschitz(sub, loss);
  const double step0 = lhat > 0.0 ? 1.0 / lhat : 1.0;
  constexpr double kGradTol = 1e-6;

  std::vector<double> beta(q, 0.0), r, w(n), grad(q), cand, rc;
  double f = smooth_loss(sub, loss, beta, r);
  double ginf = 0.0;
  bool converged = false;
  std::size_t iters = 0;
  for (; iters < cfg.inner_max_iter * 4; ++iters) {
    k.psi_deriv_vec(r.data(), w.data(), n, loss_params(loss));
    k.weighted_colsum_neg(sub.X.data(), w.data(), grad.data(), n, q);
    ginf = 0.0;
    for (double g : grad) ginf = std::fmax(ginf, std::fabs(g));
    if (ginf <= kGradTol) {
      converged = true;
      break;
    }
    double step = step0;
    for (std::size_t bt = 0;; ++bt) {
      cand.resize(q);
      for (std::size_t j = 0; j < q; ++j) cand[j] = beta[j] - step * grad[j];
      const double f_cand = smooth_loss(sub, loss, cand, rc);
      double lin = 0.0, quad = 0.0;
      for (std::size_t j = 0; j < q; ++j) {
        const double d = cand[j] - beta[j];
        lin += grad[j] * d;
        quad += d * d;
      }
      if (f_cand <= f + lin + quad / (2.0 * step) + 1e-12) {
        f = f_cand;
        break;
      }
      if (bt >= cfg.max_backtracks) { f = f_cand; break; }
      step *= cfg.step_shrink;
    }
    beta.swap(cand);
    r.swap(rc);
  }

  FitResult result;
  result.beta_hat.assign(data.p(), 0.0);
  for (std::size_t j = 0; j < q; ++j) result.beta_hat[active[j]] = beta[j];
  active_set_of(result.beta_hat, cfg.zero_threshold, &result.active_set);
  result.objective = f;
  result.inner_iters_total = iters;
  result.converged = converged;
  result.stationarity_residual = ginf;
  for (double b : result.beta_hat) result.l1_norm += std::fabs(b);
  return result;
}

double stationarity_residual(const Dataset& data, const RobustLossSpec& loss,
                             const PenaltySpec& pen,
                             std::span<const double> beta,
                             double zero_threshold) {
  auto g = smooth_gradient(data, loss, beta);
  double worst = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    double viol;
    if (std::fabs(beta[j]) > zero_threshold) {
      const double sgn = beta[j] > 0.0 ? 1.0 : -1.0;
      viol = std::fabs(g[j] + penalty_deriv(pen, std::fabs(beta[j])) * sgn);
    } else {
      viol = std::fmax(0.0, std::fabs(g[j]) - penalty_deriv(pen, 0.0));
    }
    worst = std::fmax(worst, viol);
  }
  return worst;
}

}  // namespace rexp
