#include "sfc/kernels/kernels.hpp"

#if defined(SFC_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>

#define SFC_TARGET_AVX2 __attribute__((target("avx2,fma")))

namespace sfc::kernels::avx2 {

namespace {

SFC_TARGET_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

SFC_TARGET_AVX2 inline double dot_impl(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4), _mm256_loadu_pd(b + j + 4), acc1);
  }
  for (; j + 4 <= n; j += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

SFC_TARGET_AVX2 inline void axpy_impl(double a, const double* x, std::size_t n, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4)
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  for (; j < n; ++j) y[j] += a * x[j];
}

}  // namespace

SFC_TARGET_AVX2 void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
                          double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double acc = dot_impl(w + i * cols, x, cols);
    y[i] = b ? acc + b[i] : acc;
  }
}

SFC_TARGET_AVX2 void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (dy[i] == 0.0) continue;
    axpy_impl(dy[i], w + i * cols, cols, dx);
  }
}

SFC_TARGET_AVX2 void ger_acc(const double* dy, std::size_t rows, const double* x, std::size_t cols, double* dw) {
  for (std::size_t i = 0; i < rows; ++i) {
    if (dy[i] == 0.0) continue;
    axpy_impl(dy[i], x, cols, dw + i * cols);
  }
}

SFC_TARGET_AVX2 void axpy(double a, const double* x, std::size_t n, double* y) { axpy_impl(a, x, n, y); }

SFC_TARGET_AVX2 double dot(const double* a, const double* b, std::size_t n) { return dot_impl(a, b, n); }

SFC_TARGET_AVX2 void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
                               const AdamCoefficients& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b1c = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d b2c = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d inv_bc1 = _mm256_set1_pd(1.0 / c.bias_correction1);
  const __m256d inv_bc2 = _mm256_set1_pd(1.0 / c.bias_correction2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    const __m256d mv = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i), _mm256_mul_pd(b1c, gv));
    const __m256d vv = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i), _mm256_mul_pd(b2c, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, inv_bc2)), eps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, _mm256_mul_pd(mv, inv_bc1)), denom);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    p[i] -= c.lr * (m[i] / c.bias_correction1) / (std::sqrt(v[i] / c.bias_correction2) + c.eps);
  }
}

}  // namespace sfc::kernels::avx2

#endif
