#pragma once

#include <cstdint>
#include <string>

#include "rexp/dataset.hpp"
#include "rexp/loss.hpp"
#include "rexp/rng.hpp"

namespace rexp {

enum class ErrorDist { Normal, T3, LogNormal, Weibull };

const char* error_dist_name(ErrorDist d);
ErrorDist error_dist_from_name(const std::string& name);

// Heteroscedastic simulation model:
//   y = x6 + x12 + x15 + x20 + hetero_scale * x1 * eps,
// covariates AR(1)-correlated N(0, 0.5^|i-j|) with the first coordinate
// mapped through sqrt(12)*Phi(.), errors centered to mean zero.
struct SimulationSpec {
  std::size_t n = 300;
  std::size_t p = 400;
  double rho = 0.5;
  ErrorDist error_dist = ErrorDist::Normal;
  double hetero_scale = 0.70;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1) throw std::domain_error("n must be >= 1");
    if (p < 20) throw std::domain_error("p must be >= 20");
    if (!(rho > -1.0 && rho < 1.0))
      throw std::domain_error("rho must lie in (-1,1)");
  }
};

// Standard normal CDF, |error| <= 1e-12.
double std_normal_cdf(double x);

// AR(1) recursion draw realizing cov 0.5^|i-j|, then x1 = sqrt(12)*Phi(~x1).
Matrix sample_covariates(const SimulationSpec& spec, RngStream& rng);

// iid draws, centered by the family's analytic mean.
std::vector<double> sample_errors(const SimulationSpec& spec,
                                  std::size_t count, RngStream& rng);

// Analytic (pre-centering) mean of the error family.
double error_dist_mean(ErrorDist d);

// Full dataset for a replication: substreams derived from
// (spec.seed, replication, purpose). purpose_cov/purpose_err select the
// train vs tuning streams.
Dataset generate(const SimulationSpec& spec, std::uint64_t replication = 0,
                 StreamPurpose purpose_cov = StreamPurpose::TrainCovariates,
                 StreamPurpose purpose_err = StreamPurpose::TrainErrors);

// alpha-expectile of the centered error distribution, Monte Carlo over
// 1e7 draws from a fixed dedicated stream; cached per (dist, alpha).
double error_expectile(ErrorDist d, const ExpectileLevel& level);

// Level-dependent ground truth: ones on {6,12,15,20} (1-based), and
// beta_1 = hetero_scale * m_alpha(eps) when that is nonzero.
GroundTruth true_beta(const SimulationSpec& spec, const ExpectileLevel& level);

}  // namespace rexp
