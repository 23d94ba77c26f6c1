#pragma once

// Dense double-precision kernels used by the predictive-coding network.
//
// Every routine exists as a portable scalar reference and, on x86-64, as an
// AVX2+FMA variant. The variant is picked once at startup from CPUID; it can be
// pinned with select_isa() or the SFC_ISA=scalar environment variable. The two
// paths agree to rounding (they sum in a different order), so bit-for-bit
// reproducibility is guaranteed per ISA, not across ISAs.

#include <cstddef>
#include <span>
#include <string_view>

namespace sfc::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// True if the running CPU can execute `isa`.
bool isa_supported(Isa isa);

/// The ISA currently used by the dispatching entry points below.
Isa active_isa();

/// Pins the dispatch target. Returns false (and leaves the selection alone) if
/// the CPU does not support `isa`.
bool select_isa(Isa isa);

struct AdamCoefficients {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t
};

// y = W x + b with W row-major (rows x cols). `b` may be empty.
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> b, std::span<double> y);

// dx += W^T dy
void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                std::span<double> dx);

// dW += dy x^T
void ger_acc(std::span<const double> dy, std::span<const double> x, std::span<double> dw);

// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

// In-place ADAM step over flat parameter, gradient and moment arrays.
void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
               const AdamCoefficients& c);

// Explicit per-ISA entry points, used by the equivalence tests.
namespace scalar {
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b, double* y);
void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
void ger_acc(const double* dy, std::size_t rows, const double* x, std::size_t cols, double* dw);
void axpy(double a, const double* x, std::size_t n, double* y);
double dot(const double* a, const double* b, std::size_t n);
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoefficients& c);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SFC_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b, double* y);
void gemv_t_acc(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
void ger_acc(const double* dy, std::size_t rows, const double* x, std::size_t cols, double* dw);
void axpy(double a, const double* x, std::size_t n, double* y);
double dot(const double* a, const double* b, std::size_t n);
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n, const AdamCoefficients& c);
}  // namespace avx2
#endif

}  // namespace sfc::kernels
