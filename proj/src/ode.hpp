// Internal fixed/embedded Runge-Kutta steppers on small dense states.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace egt::ode {

template <std::size_t N> using State = std::array<double, N>;

template <std::size_t N, class Rhs>
State<N> rk4_step(const Rhs& f, double t, const State<N>& y, double dt) {
    const State<N> k1 = f(t, y);
    State<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const State<N> k2 = f(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const State<N> k3 = f(t + 0.5 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * k3[i];
    const State<N> k4 = f(t + dt, tmp);
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

template <std::size_t N> struct EmbeddedStep {
    State<N> y;        // 5th order solution
    double err = 0.0;  // scaled error norm; accept when <= 1
};

// Dormand-Prince 5(4) pair.
template <std::size_t N, class Rhs>
EmbeddedStep<N> dopri45_step(const Rhs& f, double t, const State<N>& y, double dt, double rel_tol,
                             double abs_tol) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const State<N> k1 = f(t, y);
    State<N> tmp;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * a21 * k1[i];
    const State<N> k2 = f(t + c2 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + dt * (a31 * k1[i] + a32 * k2[i]);
    const State<N> k3 = f(t + c3 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + dt * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State<N> k4 = f(t + c4 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + dt * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const State<N> k5 = f(t + c5 * dt, tmp);
    for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + dt * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const State<N> k6 = f(t + dt, tmp);

    EmbeddedStep<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out.y[i] = y[i] + dt * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    const State<N> k7 = f(t + dt, out.y);

    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double diff = dt * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
        const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(out.y[i]));
        const double r = diff / scale;
        acc += r * r;
    }
    out.err = std::sqrt(acc / static_cast<double>(N));
    return out;
}

} // namespace egt::ode
