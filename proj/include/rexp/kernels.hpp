#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the loss and solver code paths.
// Scalar reference implementations always exist; an AVX2 variant is
// selected at startup when the CPU supports it. The active backend can
// be forced with the environment variable REXP_KERNELS=scalar|avx2
// (read once, before the first kernel call).

namespace rexp::kernels {

struct LossParams {
  double alpha;
  double c_upper;  // > 0, may be +inf (untruncated mode)
  double c_lower;  // < 0, may be -inf
};

struct KernelTable {
  // r[i] = y[i] - x_i' beta, X row-major n x p
  void (*residuals)(const double* X, const double* y, const double* beta,
                    double* r, std::size_t n, std::size_t p);
  // sum_i psi_alpha(r[i]; C_u, C_l), pairwise accumulation
  double (*psi_sum)(const double* r, std::size_t n, LossParams lp);
  // sum_i phi_alpha(r[i])
  double (*phi_sum)(const double* r, std::size_t n, double alpha);
  // w[i] = psi'_alpha(r[i]; C_u, C_l)
  void (*psi_deriv_vec)(const double* r, double* w, std::size_t n,
                        LossParams lp);
  // g[j] = -(1/n) sum_i w[i] * X[i][j]
  void (*weighted_colsum_neg)(const double* X, const double* w, double* g,
                              std::size_t n, std::size_t p);
  // out[j] = sign(v[j]) * max(|v[j]| - step * wt[j], 0), exact zeros
  void (*soft_threshold)(const double* v, const double* wt, double step,
                         double* out, std::size_t p);
  double (*dot)(const double* a, const double* b, std::size_t n);
  const char* name;
};

// Active backend (dispatch decided on first use).
const KernelTable& active();

// Named backends for equivalence tests. avx2() is null when unsupported.
const KernelTable& scalar();
const KernelTable* avx2();

}  // namespace rexp::kernels
