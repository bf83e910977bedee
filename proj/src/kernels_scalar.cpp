#include "rexp/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

namespace rexp::kernels {
namespace {

void residuals_scalar(const double* X, const double* y, const double* beta,
                      double* r, std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * p;
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) acc += row[j] * beta[j];
    r[i] = y[i] - acc;
  }
}

inline double psi_one(double r, const LossParams& lp) {
  if (r >= lp.c_upper)
    return 2.0 * lp.alpha * lp.c_upper * r - lp.alpha * lp.c_upper * lp.c_upper;
  if (r >= 0.0) return lp.alpha * r * r;
  if (r > lp.c_lower) return (1.0 - lp.alpha) * r * r;
  return 2.0 * (1.0 - lp.alpha) * lp.c_lower * r -
         (1.0 - lp.alpha) * lp.c_lower * lp.c_lower;
}

inline double psi_deriv_one(double r, const LossParams& lp) {
  if (r >= lp.c_upper) return 2.0 * lp.alpha * lp.c_upper;
  if (r >= 0.0) return 2.0 * lp.alpha * r;
  if (r > lp.c_lower) return 2.0 * (1.0 - lp.alpha) * r;
  return 2.0 * (1.0 - lp.alpha) * lp.c_lower;
}

// Pairwise reduction keeps the accumulation error O(log n).
template <typename F>
double pairwise_sum(const double* v, std::size_t n, F term) {
  if (n <= 16) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += term(v[i]);
    return acc;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h, term) + pairwise_sum(v + h, n - h, term);
}

double psi_sum_scalar(const double* r, std::size_t n, LossParams lp) {
  return pairwise_sum(r, n, [&](double x) { return psi_one(x, lp); });
}

double phi_sum_scalar(const double* r, std::size_t n, double alpha) {
  return pairwise_sum(r, n, [&](double x) {
    return (x >= 0.0 ? alpha : 1.0 - alpha) * x * x;
  });
}

void psi_deriv_vec_scalar(const double* r, double* w, std::size_t n,
                          LossParams lp) {
  for (std::size_t i = 0; i < n; ++i) w[i] = psi_deriv_one(r[i], lp);
}

void weighted_colsum_neg_scalar(const double* X, const double* w, double* g,
                                std::size_t n, std::size_t p) {
  std::memset(g, 0, p * sizeof(double));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * p;
    const double wi = w[i];
    for (std::size_t j = 0; j < p; ++j) g[j] += wi * row[j];
  }
  const double scale = -1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < p; ++j) g[j] *= scale;
}

void soft_threshold_scalar(const double* v, const double* wt, double step,
                           double* out, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    const double t = step * wt[j];
    const double a = std::fabs(v[j]);
    out[j] = a > t ? std::copysign(a - t, v[j]) : 0.0;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

const KernelTable kScalar = {
    residuals_scalar,    psi_sum_scalar,       phi_sum_scalar,
    psi_deriv_vec_scalar, weighted_colsum_neg_scalar, soft_threshold_scalar,
    dot_scalar,          "scalar"};

const KernelTable* pick_backend() {
  const char* force = std::getenv("REXP_KERNELS");
  if (force != nullptr) {
    std::string s(force);
    if (s == "scalar") return &kScalar;
    if (s == "avx2" && avx2() != nullptr) return avx2();
  }
#if defined(__x86_64__)
  if (avx2() != nullptr && __builtin_cpu_supports("avx2")) return avx2();
#endif
  return &kScalar;
}

}  // namespace

const KernelTable& scalar() { return kScalar; }

const KernelTable& active() {
  static const KernelTable* table = pick_backend();
  return *table;
}

}  // namespace rexp::kernels
