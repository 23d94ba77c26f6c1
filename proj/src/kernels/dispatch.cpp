#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "sfc/kernels/kernels.hpp"

namespace sfc::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("SFC_ISA"); env && std::string(env) == "scalar") return Isa::Scalar;
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(SFC_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

bool select_isa(Isa isa) {
  if (!isa_supported(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

#if defined(SFC_HAVE_AVX2_KERNELS)
#define SFC_DISPATCH(call)                                \
  do {                                                    \
    if (active_isa() == Isa::Avx2) {                      \
      avx2::call;                                         \
    } else {                                              \
      scalar::call;                                       \
    }                                                     \
  } while (0)
#define SFC_DISPATCH_RET(call) return active_isa() == Isa::Avx2 ? avx2::call : scalar::call
#else
#define SFC_DISPATCH(call) scalar::call
#define SFC_DISPATCH_RET(call) return scalar::call
#endif

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> b, std::span<double> y) {
  assert(w.size() >= rows * cols && x.size() >= cols && y.size() >= rows);
  assert(b.empty() || b.size() >= rows);
  const double* bp = b.empty() ? nullptr : b.data();
  SFC_DISPATCH(gemv(w.data(), rows, cols, x.data(), bp, y.data()));
}

void gemv_t_acc(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> dy,
                std::span<double> dx) {
  assert(w.size() >= rows * cols && dy.size() >= rows && dx.size() >= cols);
  SFC_DISPATCH(gemv_t_acc(w.data(), rows, cols, dy.data(), dx.data()));
}

void ger_acc(std::span<const double> dy, std::span<const double> x, std::span<double> dw) {
  assert(dw.size() >= dy.size() * x.size());
  SFC_DISPATCH(ger_acc(dy.data(), dy.size(), x.data(), x.size(), dw.data()));
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(y.size() >= x.size());
  SFC_DISPATCH(axpy(a, x.data(), x.size(), y.data()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  SFC_DISPATCH_RET(dot(a.data(), b.data(), a.size()));
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
               const AdamCoefficients& c) {
  assert(grads.size() == params.size() && m.size() == params.size() && v.size() == params.size());
  SFC_DISPATCH(adam_step(params.data(), grads.data(), m.data(), v.data(), params.size(), c));
}

}  // namespace sfc::kernels
