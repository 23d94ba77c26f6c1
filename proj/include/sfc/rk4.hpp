#pragma once

#include <array>
#include <cstddef>

namespace sfc {

template <std::size_t N>
using StateVector = std::array<double, N>;

/// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <std::size_t N, class Deriv>
StateVector<N> rk4_step(const StateVector<N>& x, double t, double dt, Deriv&& f) {
  auto offset = [&](const StateVector<N>& k, double h) {
    StateVector<N> out;
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + h * k[i];
    return out;
  };
  const StateVector<N> k1 = f(t, x);
  const StateVector<N> k2 = f(t + 0.5 * dt, offset(k1, 0.5 * dt));
  const StateVector<N> k3 = f(t + 0.5 * dt, offset(k2, 0.5 * dt));
  const StateVector<N> k4 = f(t + dt, offset(k3, dt));
  StateVector<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace sfc
