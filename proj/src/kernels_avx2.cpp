// AVX2/FMA variants of the inner-loop kernels. This translation unit is
// the only one compiled with -mavx2 -mfma; callers go through the
// runtime-dispatched table in kernels.cpp.
#include "rexp/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace rexp::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void residuals_avx2(const double* X, const double* y, const double* beta,
                    double* r, std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * p;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 8 <= p; j += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j),
                             _mm256_loadu_pd(beta + j), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + j + 4),
                             _mm256_loadu_pd(beta + j + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; j < p; ++j) acc += row[j] * beta[j];
    r[i] = y[i] - acc;
  }
}

// psi(r) = w(r) * rc * (2r - rc) with rc = clamp(r, C_l, C_u) and
// w(r) = alpha for r >= 0 else 1-alpha. The clamped form avoids inf
// arithmetic in masked-off lanes when a truncation bound is infinite.
inline __m256d psi_vec(__m256d r, __m256d cu, __m256d cl, __m256d va,
                       __m256d v1ma) {
  __m256d rc = _mm256_min_pd(_mm256_max_pd(r, cl), cu);
  __m256d nonneg = _mm256_cmp_pd(r, _mm256_setzero_pd(), _CMP_GE_OQ);
  __m256d w = _mm256_blendv_pd(v1ma, va, nonneg);
  __m256d val = _mm256_mul_pd(
      rc, _mm256_sub_pd(_mm256_add_pd(r, r), rc));
  return _mm256_mul_pd(w, val);
}

double psi_sum_avx2(const double* r, std::size_t n, LossParams lp) {
  const __m256d cu = _mm256_set1_pd(lp.c_upper);
  const __m256d cl = _mm256_set1_pd(lp.c_lower);
  const __m256d va = _mm256_set1_pd(lp.alpha);
  const __m256d v1ma = _mm256_set1_pd(1.0 - lp.alpha);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, psi_vec(_mm256_loadu_pd(r + i), cu, cl, va, v1ma));
  double tail = 0.0;
  for (; i < n; ++i) {
    double rc = std::fmin(std::fmax(r[i], lp.c_lower), lp.c_upper);
    double w = r[i] >= 0.0 ? lp.alpha : 1.0 - lp.alpha;
    tail += w * rc * (2.0 * r[i] - rc);
  }
  return hsum(acc) + tail;
}

double phi_sum_avx2(const double* r, std::size_t n, double alpha) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d v1ma = _mm256_set1_pd(1.0 - alpha);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(r + i);
    __m256d nonneg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
    __m256d w = _mm256_blendv_pd(v1ma, va, nonneg);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(w, x), x, acc);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += (r[i] >= 0.0 ? alpha : 1.0 - alpha) * r[i] * r[i];
  return hsum(acc) + tail;
}

void psi_deriv_vec_avx2(const double* r, double* w, std::size_t n,
                        LossParams lp) {
  const __m256d cu = _mm256_set1_pd(lp.c_upper);
  const __m256d cl = _mm256_set1_pd(lp.c_lower);
  const __m256d va2 = _mm256_set1_pd(2.0 * lp.alpha);
  const __m256d v1ma2 = _mm256_set1_pd(2.0 * (1.0 - lp.alpha));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(r + i);
    __m256d rc = _mm256_min_pd(_mm256_max_pd(x, cl), cu);
    __m256d nonneg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GE_OQ);
    __m256d wgt = _mm256_blendv_pd(v1ma2, va2, nonneg);
    _mm256_storeu_pd(w + i, _mm256_mul_pd(wgt, rc));
  }
  for (; i < n; ++i) {
    double rc = std::fmin(std::fmax(r[i], lp.c_lower), lp.c_upper);
    w[i] = (r[i] >= 0.0 ? 2.0 * lp.alpha : 2.0 * (1.0 - lp.alpha)) * rc;
  }
}

void weighted_colsum_neg_avx2(const double* X, const double* w, double* g,
                              std::size_t n, std::size_t p) {
  std::memset(g, 0, p * sizeof(double));
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * p;
    const __m256d wi = _mm256_set1_pd(w[i]);
    std::size_t j = 0;
    for (; j + 4 <= p; j += 4)
      _mm256_storeu_pd(
          g + j, _mm256_fmadd_pd(wi, _mm256_loadu_pd(row + j),
                                 _mm256_loadu_pd(g + j)));
    for (; j < p; ++j) g[j] += w[i] * row[j];
  }
  const double scale = -1.0 / static_cast<double>(n);
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= p; j += 4)
    _mm256_storeu_pd(g + j, _mm256_mul_pd(vs, _mm256_loadu_pd(g + j)));
  for (; j < p; ++j) g[j] *= scale;
}

void soft_threshold_avx2(const double* v, const double* wt, double step,
                         double* out, std::size_t p) {
  const __m256d vstep = _mm256_set1_pd(step);
  const __m256d signmask = _mm256_set1_pd(-0.0);
  std::size_t j = 0;
  for (; j + 4 <= p; j += 4) {
    __m256d x = _mm256_loadu_pd(v + j);
    __m256d t = _mm256_mul_pd(vstep, _mm256_loadu_pd(wt + j));
    __m256d a = _mm256_andnot_pd(signmask, x);
    __m256d shrunk = _mm256_max_pd(_mm256_sub_pd(a, t), _mm256_setzero_pd());
    __m256d sign = _mm256_and_pd(signmask, x);
    _mm256_storeu_pd(out + j, _mm256_or_pd(shrunk, sign));
  }
  for (; j < p; ++j) {
    const double t = step * wt[j];
    const double a = std::fabs(v[j]);
    out[j] = a > t ? std::copysign(a - t, v[j]) : 0.0;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return hsum(acc) + tail;
}

const KernelTable kAvx2 = {
    residuals_avx2,    psi_sum_avx2,       phi_sum_avx2,
    psi_deriv_vec_avx2, weighted_colsum_neg_avx2, soft_threshold_avx2,
    dot_avx2,          "avx2"};

}  // namespace

const KernelTable* avx2() { return &kAvx2; }

}  // namespace rexp::kernels

#else

namespace rexp::kernels {
const KernelTable* avx2() { return nullptr; }
}  // namespace rexp::kernels

#endif
