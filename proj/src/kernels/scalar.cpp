#include <cmath>

#include "sfc/kernels/kernels.hpp"

namespace sfc::kernels::scalar {

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b, double* y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = w + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = b ? acc + b[i] : acc;
  }
}

void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = dy[i];
    if (a == 0.0) continue;
    const double* row = w + i * cols;
    for (std::size_t j = 0; j < cols; ++j) dx[j] += a * row[j];
  }
}

void ger_acc(const double* dy, std::size_t rows, const double* x, std::size_t cols, double* dw) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = dy[i];
    if (a == 0.0) continue;
    double* row = dw + i * cols;
    for (std::size_t j = 0; j < cols; ++j) row[j] += a * x[j];
  }
}

void axpy(double a, const double* x, std::size_t n, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void adam_step(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoefficients& c) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c.bias_correction1;
    const double v_hat = v[i] / c.bias_correction2;
    p[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

}  // namespace sfc::kernels::scalar
