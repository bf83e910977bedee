// Acceptance suite: runs the desk-scale benchmark protocol end to end and
// checks the headline behaviors of the estimator. One pass/fail line per
// criterion; exit status is nonzero if any criterion fails.
//
// The experiment criteria (1-4) share a reduced grid (10 lambdas x
// {1,4,16,1e6} MAD multiples) so the whole binary completes in well under
// an hour on a single core.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rexp/datagen.hpp"
#include "rexp/experiment.hpp"
#include "rexp/loss.hpp"
#include "rexp/metrics.hpp"
#include "rexp/penalty.hpp"
#include "rexp/solver.hpp"

using namespace rexp;

namespace {

int g_failures = 0;

void report(int idx, const char* title, bool ok, const std::string& detail) {
  std::printf("[%d/7] %s  %s: %s\n", idx, ok ? "PASS" : "FAIL", title,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

ExperimentConfig base_config() {
  ExperimentConfig cfg;
  cfg.n = 300;
  cfg.p = 400;
  cfg.replications = 20;
  cfg.master_seed = 1;
  cfg.n_lambda = 10;
  cfg.c_multiples = {1.0, 2.0, 4.0, 1e6};
  cfg.tuning_multiple = 10;
  cfg.jobs = 0;
  return cfg;
}

const ReportCell* find_cell(const ExperimentResult& r, const char* dist,
                            double alpha, const char* method) {
  for (const auto& row : r.rows)
    if (row.dist == dist && std::fabs(row.alpha - alpha) < 1e-12 &&
        row.method == method)
      return &row.cell;
  return nullptr;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void collect(std::vector<StationarityRecord>& sink, const ExperimentResult& r) {
  sink.insert(sink.end(), r.stationarity.begin(), r.stationarity.end());
}

// ---------------------------------------------------------------- criterion 5

// Intercept plus AR(1) covariates; the intercept carries the truncation
// bias, which mean-zero columns cannot absorb.
Dataset low_dim_instance(std::uint64_t seed, const std::vector<double>& bt) {
  const std::size_t n = 5000, p = bt.size();
  RngStream xs(seed, 0, StreamPurpose::TrainCovariates);
  RngStream es(seed, 0, StreamPurpose::TrainErrors);
  Dataset data;
  data.X = Matrix(n, p);
  data.y.resize(n);
  const double fill = std::sqrt(0.75);
  for (std::size_t i = 0; i < n; ++i) {
    data.X(i, 0) = 1.0;
    double prev = 0.0, lin = bt[0];
    for (std::size_t j = 1; j < p; ++j) {
      const double z = xs.normal();
      prev = j == 1 ? z : 0.5 * prev + fill * z;
      data.X(i, j) = prev;
      lin += prev * bt[j];
    }
    data.y[i] = lin + es.student_t3();
  }
  return data;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t m = xs.size();
  auto ranks = [m](const std::vector<double>& v) {
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (v[j] < v[i] || (v[j] == v[i] && j < i)) r[i] += 1.0;
    return r;
  };
  auto rx = ranks(xs), ry = ranks(ys);
  const double mean = (static_cast<double>(m) - 1.0) / 2.0;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    num += (rx[i] - mean) * (ry[i] - mean);
    dx += (rx[i] - mean) * (rx[i] - mean);
    dy += (ry[i] - mean) * (ry[i] - mean);
  }
  return num / std::sqrt(dx * dy);
}

void criterion5() {
  // One-sided truncation (C_l effectively -inf): the sweep bias comes from
  // clipping one tail only, so no cancellation masks the trend.
  const std::vector<double> bt{0.5, 1.0, -1.0, 0.5, 2.0};
  const std::vector<double> cs{0.5, 1.0, 2.0, 4.0, 8.0};
  const std::vector<std::size_t> active{0, 1, 2, 3, 4};
  const ExpectileLevel level(0.5);
  FitConfig cfg;
  bool ok = true;
  double mean_rho = 0.0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Dataset data = low_dim_instance(seed, bt);
    auto base = fit_oracle(data, RobustLossSpec::untruncated(level), active, cfg);
    ok = ok && base.converged;
    std::vector<double> dist;
    for (double c : cs) {
      auto fit = fit_oracle(data, RobustLossSpec(level, c, -1e6), active, cfg);
      ok = ok && fit.converged;
      double d2 = 0.0;
      for (std::size_t j = 0; j < bt.size(); ++j) {
        const double d = fit.beta_hat[j] - base.beta_hat[j];
        d2 += d * d;
      }
      dist.push_back(std::sqrt(d2));
    }
    const double rho = spearman(cs, dist);
    mean_rho += rho / 5.0;
    detail += (seed == 1 ? "rho=" : ",") + fmt(rho);
  }
  ok = ok && mean_rho <= -0.8;
  report(5, "approximation error shrinks with the truncation level", ok,
         detail + "; mean=" + fmt(mean_rho) + " (need <= -0.8)");
}

// ---------------------------------------------------------------- criterion 6

Dataset gaussian_instance(std::size_t n, std::size_t p, unsigned seed,
                          const std::vector<double>& bt, double noise = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Dataset data;
  data.X = Matrix(n, p);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lin = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      data.X(i, j) = nd(rng);
      lin += data.X(i, j) * bt[j];
    }
    data.y[i] = lin + noise * nd(rng);
  }
  return data;
}

bool brute_force_p2(std::string& why) {
  // Weighted-L1 subproblem vs an exhaustive 2-D grid.
  {
    Dataset data = gaussian_instance(20, 2, 53, {0.8, -0.6});
    RobustLossSpec loss(ExpectileLevel(0.5), 2.0, -2.0);
    FitConfig cfg;
    cfg.inner_tol = 1e-12;
    cfg.inner_max_iter = 100000;
    std::vector<double> w{0.1, 0.1};
    auto beta = solve_weighted_l1(data, loss, w, cfg, {});
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg(2, 0.0);
    for (double b0 = -3.0; b0 <= 3.0; b0 += 1e-3)
      for (double b1 = -3.0; b1 <= 3.0; b1 += 1e-3) {
        double val = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i)
          val += psi(loss, data.y[i] - data.X(i, 0) * b0 - data.X(i, 1) * b1);
        val = val / static_cast<double>(data.n()) + w[0] * std::fabs(b0) +
              w[1] * std::fabs(b1);
        if (val < best) {
          best = val;
          arg = {b0, b1};
        }
      }
    if (std::fabs(beta[0] - arg[0]) > 2e-3 ||
        std::fabs(beta[1] - arg[1]) > 2e-3) {
      why = "weighted-L1 argmin off the grid oracle";
      return false;
    }
  }
  // Full folded-concave fit vs the grid-minimum objective.
  {
    Dataset data = gaussian_instance(15, 2, 101, {1.0, -0.5});
    RobustLossSpec loss(ExpectileLevel(0.5), 2.0, -2.0);
    PenaltySpec scad(PenaltyFamily::Scad, 0.15);
    FitConfig cfg;
    cfg.inner_tol = 1e-10;
    auto fit = fit_lla(data, loss, scad, cfg);
    double best = std::numeric_limits<double>::infinity();
    for (double b0 = -3.0; b0 <= 3.0; b0 += 1e-3)
      for (double b1 = -3.0; b1 <= 3.0; b1 += 1e-3) {
        double val = 0.0;
        for (std::size_t i = 0; i < data.n(); ++i)
          val += psi(loss, data.y[i] - data.X(i, 0) * b0 - data.X(i, 1) * b1);
        val = val / static_cast<double>(data.n()) + penalty_value(scad, b0) +
              penalty_value(scad, b1);
        best = std::fmin(best, val);
      }
    if (!(fit.objective <= best + 1e-6)) {
      why = "LLA objective above the grid minimum";
      return false;
    }
  }
  return true;
}

bool sandwich_pairs(std::string& why) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 3.0);
  const double alphas[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (int k = 0; k < 1000; ++k) {
    const ExpectileLevel level(alphas[k % 5]);
    const double a = level.alpha();
    const double r = nd(rng), r0 = nd(rng);
    const double gap =
        phi(level, r) - phi(level, r0) - phi_deriv(level, r0) * (r - r0);
    const double q = (r - r0) * (r - r0);
    const double slack = 1e-9 * (1.0 + q);
    if (gap < std::fmin(a, 1.0 - a) * q - slack ||
        gap > std::fmax(a, 1.0 - a) * q + slack) {
      why = "sandwich violated at r=" + fmt(r) + " r0=" + fmt(r0);
      return false;
    }
  }
  return true;
}

bool c1_continuity(std::string& why) {
  const double h = 1e-7;
  for (double a : {0.1, 0.5, 0.9})
    for (auto [cu, cl] : {std::pair{1.0, -2.0}, std::pair{0.7, -0.7}}) {
      RobustLossSpec spec(ExpectileLevel(a), cu, cl);
      for (double b : {cl, 0.0, cu}) {
        const double slope_l = (psi(spec, b) - psi(spec, b - h)) / h;
        const double slope_r = (psi(spec, b + h) - psi(spec, b)) / h;
        if (std::fabs(slope_l - slope_r) > 1e-5 ||
            std::fabs(psi_deriv(spec, b + h) - psi_deriv(spec, b - h)) > 1e-5) {
          why = "kink at boundary " + fmt(b) + " (alpha=" + fmt(a) + ")";
          return false;
        }
      }
    }
  return true;
}

bool weak_convexity_checks(std::string& why) {
  const double h = 1e-3;
  for (auto fam : {PenaltyFamily::Scad, PenaltyFamily::Mcp}) {
    PenaltySpec pen(fam, 0.8);
    const double mu = pen.weak_convexity();
    for (double t = h; t <= 5.0; t += h) {
      const double dd = (penalty_value(pen, t + h) - 2.0 * penalty_value(pen, t) +
                         penalty_value(pen, t - h)) /
                        (h * h);
      if (dd < -mu - 1e-4) {
        why = "second difference " + fmt(dd) + " below -mu at t=" + fmt(t);
        return false;
      }
    }
  }
  return true;
}

bool gradient_fd(std::string& why) {
  Dataset data = gaussian_instance(30, 6, 91, {1.0, 0.0, -0.5, 0.3, 0.0, 0.8});
  RobustLossSpec loss(ExpectileLevel(0.3), 1.5, -2.5);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd(0.0, 0.5);
  std::vector<double> beta(6);
  for (auto& b : beta) b = nd(rng);
  auto g = smooth_gradient(data, loss, beta);
  const double h = 1e-6;
  auto smooth = [&](const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      double r = data.y[i];
      for (std::size_t j = 0; j < 6; ++j) r -= data.X(i, j) * b[j];
      s += psi(loss, r);
    }
    return s / static_cast<double>(data.n());
  };
  for (std::size_t j = 0; j < 6; ++j) {
    auto hi = beta, lo = beta;
    hi[j] += h;
    lo[j] -= h;
    const double fd = (smooth(hi) - smooth(lo)) / (2.0 * h);
    if (std::fabs(fd - g[j]) > 1e-4) {
      why = "coord " + std::to_string(j) + ": fd=" + fmt(fd) +
            " analytic=" + fmt(g[j]);
      return false;
    }
  }
  return true;
}

bool datagen_mc(std::string& why) {
  SimulationSpec spec;
  spec.n = 100000;
  spec.p = 20;
  spec.seed = 5;
  RngStream rng(spec.seed, 0, StreamPurpose::TrainCovariates);
  Matrix x = sample_covariates(spec, rng);
  for (std::size_t a = 1; a < 6; ++a)
    for (std::size_t b = a; b < 6; ++b) {
      double ma = 0.0, mb = 0.0, cov = 0.0;
      for (std::size_t i = 0; i < spec.n; ++i) {
        ma += x(i, a);
        mb += x(i, b);
      }
      ma /= spec.n;
      mb /= spec.n;
      for (std::size_t i = 0; i < spec.n; ++i)
        cov += (x(i, a) - ma) * (x(i, b) - mb);
      cov /= spec.n - 1;
      const double target = std::pow(0.5, static_cast<double>(b - a));
      if (std::fabs(cov - target) > 0.02) {
        why = "cov(" + std::to_string(a) + "," + std::to_string(b) +
              ")=" + fmt(cov) + " target " + fmt(target);
        return false;
      }
    }
  for (auto d : {ErrorDist::Normal, ErrorDist::T3, ErrorDist::LogNormal,
                 ErrorDist::Weibull}) {
    spec.error_dist = d;
    RngStream es(11, 0, StreamPurpose::TrainErrors);
    const std::size_t big = d == ErrorDist::Normal ? 1000000 : 10000000;
    auto eps = sample_errors(spec, big, es);
    double mean = 0.0, var = 0.0;
    for (double e : eps) mean += e;
    mean /= static_cast<double>(big);
    for (double e : eps) var += (e - mean) * (e - mean);
    var /= static_cast<double>(big - 1);
    const double se = std::sqrt(var / static_cast<double>(big));
    if (std::fabs(mean) > 3.0 * se) {
      why = std::string("centering drift for ") + error_dist_name(d) + ": " +
            fmt(mean) + " vs 3se=" + fmt(3.0 * se);
      return false;
    }
  }
  return true;
}

void criterion6(const std::vector<StationarityRecord>& records) {
  struct Part {
    const char* tag;
    bool ok;
    std::string why;
  };
  std::vector<Part> parts;
  auto add = [&parts](const char* tag, bool (*fn)(std::string&)) {
    std::string why;
    const bool ok = fn(why);
    parts.push_back({tag, ok, why});
  };
  add("brute-force", brute_force_p2);
  add("sandwich", sandwich_pairs);
  add("C1", c1_continuity);
  add("weak-convexity", weak_convexity_checks);
  add("gradient-fd", gradient_fd);

  double worst = 0.0;
  for (const auto& s : records)
    worst = std::fmax(worst, s.residual / std::fmax(s.grad_scale, 1e-300));
  parts.push_back({"stationarity", !records.empty() && worst <= 1e-4,
                   "worst ratio " + fmt(worst) + " over " +
                       std::to_string(records.size()) + " fits"});

  add("datagen-mc", datagen_mc);

  bool ok = true;
  std::string detail;
  for (const auto& p : parts) {
    ok = ok && p.ok;
    if (!detail.empty()) detail += ", ";
    detail += std::string(p.tag) + (p.ok ? " ok" : " FAIL(" + p.why + ")");
  }
  report(6, "property suite", ok, detail);
}

}  // namespace

int main() {
  std::vector<StationarityRecord> records;
  const std::string tmp =
      (std::filesystem::temp_directory_path() / "rexp-acceptance").string();

  // Criterion 1 cell (Normal, alpha 0.5, all methods), run twice so the
  // second pass doubles as the determinism check.
  ExperimentConfig c1 = base_config();
  c1.distributions = {ErrorDist::Normal};
  c1.alphas = {0.5};
  c1.methods = {Method::ReScad, Method::EScad, Method::Oracle};
  c1.out_dir = tmp + "/run1";
  std::fprintf(stderr, "running criterion 1 cell (pass 1/2)...\n");
  auto r1 = run_experiment(c1);
  write_experiment_outputs(c1, r1);
  collect(records, r1);

  ExperimentConfig c7 = c1;
  c7.out_dir = tmp + "/run2";
  std::fprintf(stderr, "running criterion 1 cell (pass 2/2)...\n");
  auto r7 = run_experiment(c7);
  write_experiment_outputs(c7, r7);

  const auto* re1 = find_cell(r1, "normal", 0.5, "RE-SCAD");
  const auto* e1 = find_cell(r1, "normal", 0.5, "E-SCAD");
  {
    bool ok = re1 != nullptr && e1 != nullptr && !re1->is_na && !e1->is_na;
    std::string detail = "missing cells";
    if (ok) {
      const double ratio =
          std::fmax(re1->se_mean, e1->se_mean) /
          std::fmin(re1->se_mean, e1->se_mean);
      ok = re1->ae_mean >= 0.12 && re1->ae_mean <= 0.40 && re1->f == 20 &&
           re1->n_total == 20 && re1->size_mean >= 4.0 &&
           re1->size_mean <= 5.5 && ratio <= 1.6;
      detail = "AE=" + fmt(re1->ae_mean) + " in [0.12,0.40], F=" +
               std::to_string(re1->f) + "/20, Size=" + fmt(re1->size_mean) +
               " in [4,5.5], SE ratio=" + fmt(ratio) + " <= 1.6";
    }
    report(1, "normal-error parity", ok, detail);
  }

  // Criterion 2: t3 and LogNormal at alpha 0.5.
  ExperimentConfig c2 = base_config();
  c2.distributions = {ErrorDist::T3, ErrorDist::LogNormal};
  c2.alphas = {0.5};
  c2.methods = {Method::ReScad, Method::EScad};
  // No grid reduction is granted for this criterion: use the full default
  // tuning grid.
  c2.n_lambda = 20;
  c2.c_multiples = ExperimentConfig{}.c_multiples;
  std::fprintf(stderr, "running criterion 2 cells...\n");
  auto r2 = run_experiment(c2);
  collect(records, r2);
  {
    const auto* ret = find_cell(r2, "t3", 0.5, "RE-SCAD");
    const auto* et = find_cell(r2, "t3", 0.5, "E-SCAD");
    const auto* rel = find_cell(r2, "lognormal", 0.5, "RE-SCAD");
    const auto* el = find_cell(r2, "lognormal", 0.5, "E-SCAD");
    bool ok = ret && et && rel && el && !ret->is_na && !et->is_na &&
              !rel->is_na && !el->is_na;
    std::string detail = "missing cells";
    if (ok) {
      ok = ret->se_mean < et->se_mean && rel->se_mean < el->se_mean &&
           rel->size_mean <= 8.0 && el->size_mean >= 10.0;
      detail = "t3 SE " + fmt(ret->se_mean) + " < " + fmt(et->se_mean) +
               "; lognormal SE " + fmt(rel->se_mean) + " < " +
               fmt(el->se_mean) + ", Size " + fmt(rel->size_mean) +
               " <= 8 vs " + fmt(el->size_mean) + " >= 10";
    }
    report(2, "heavy-tail dominance", ok, detail);
  }

  // Criterion 3: tail levels detect the heteroscedastic coordinate.
  ExperimentConfig c3 = base_config();
  c3.distributions = {ErrorDist::Normal};
  c3.alphas = {0.1, 0.9};
  c3.methods = {Method::ReScad};
  std::fprintf(stderr, "running criterion 3 cells...\n");
  auto r3 = run_experiment(c3);
  collect(records, r3);
  {
    const auto* lo = find_cell(r3, "normal", 0.1, "RE-SCAD");
    const auto* hi = find_cell(r3, "normal", 0.9, "RE-SCAD");
    bool ok = lo && hi && re1 && !lo->is_na && !hi->is_na;
    std::string detail = "missing cells";
    if (ok) {
      ok = lo->f1 == 20 && hi->f1 == 20 && re1->f1 <= 6;
      detail = "F1 alpha=0.1: " + std::to_string(lo->f1) +
               "/20, alpha=0.9: " + std::to_string(hi->f1) +
               "/20, alpha=0.5: " + std::to_string(re1->f1) + "/20 (<= 6)";
    }
    report(3, "heteroscedasticity detection at tail levels", ok, detail);
  }

  // Criterion 4: Weibull errors at alpha 0.1.
  ExperimentConfig c4 = base_config();
  c4.distributions = {ErrorDist::Weibull};
  c4.alphas = {0.1};
  c4.methods = {Method::ReScad, Method::EScad};
  // As with criterion 2, no grid reduction is granted here: use the full
  // default tuning grid.
  c4.n_lambda = 20;
  c4.c_multiples = ExperimentConfig{}.c_multiples;
  std::fprintf(stderr, "running criterion 4 cell...\n");
  auto r4 = run_experiment(c4);
  collect(records, r4);
  {
    const auto* re = find_cell(r4, "weibull", 0.1, "RE-SCAD");
    const auto* e = find_cell(r4, "weibull", 0.1, "E-SCAD");
    bool ok = re && e && !re->is_na;
    std::string detail = "missing cells";
    if (ok) {
      const bool e_breaks =
          e->n_fail >= 10 || e->is_na ||
          (!re->is_na && e->se_mean >= 5.0 * re->se_mean);
      ok = re->n_fail == 0 && re->f >= 18 && e_breaks;
      detail = "robust F=" + std::to_string(re->f) + "/20 with " +
               std::to_string(re->n_fail) + " failures; untruncated fails " +
               std::to_string(e->n_fail) + "/20 or SE " + fmt(e->se_mean) +
               " >= 5x " + fmt(re->se_mean);
    }
    report(4, "heavy-tail stress (Weibull)", ok, detail);
  }

  criterion5();
  criterion6(records);

  {
    const std::string a_csv = slurp(tmp + "/run1/report.csv");
    const std::string b_csv = slurp(tmp + "/run2/report.csv");
    const std::string a_txt = slurp(tmp + "/run1/report.txt");
    const std::string b_txt = slurp(tmp + "/run2/report.txt");
    const bool ok = !a_csv.empty() && a_csv == b_csv && !a_txt.empty() &&
                    a_txt == b_txt;
    report(7, "determinism", ok,
           ok ? "report.csv and report.txt byte-identical across reruns"
              : "reports differ between identically-seeded runs");
  }

  if (g_failures == 0) {
    std::printf("acceptance: all 7 criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criteria failed\n", g_failures);
  return 1;
}
