#ifndef SLX_RK_HPP
#define SLX_RK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "slx/types.hpp"

namespace slx {

/// Adaptive Dormand–Prince 5(4) on a fixed-size complex state. The RHS is
/// f(x, y, dy). Steps from x0 to x1 (either direction); `observer`, when set,
/// is called after every accepted step with (x, state).
template <std::size_t N>
struct DormandPrince {
    using State = std::array<cdouble, N>;
    using Rhs = std::function<void(double, const State&, State&)>;
    using Observer = std::function<void(double, const State&)>;

    double rel_tol = 1e-12;
    double abs_tol = 1e-14;
    int max_steps = 400000;

    /// Integrates in place; returns the number of accepted steps.
    int integrate(const Rhs& rhs, State& y, double x0, double x1,
                  const Observer& observer = {}) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        if (x0 == x1) return 0;
        const double dir = x1 > x0 ? 1.0 : -1.0;
        double x = x0;
        double h = dir * std::min(std::abs(x1 - x0), 1e-2 * (std::abs(x1 - x0) + 1.0));

        State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
        rhs(x, y, k1);
        int accepted = 0;
        for (int step = 0; step < max_steps; ++step) {
            if ((x - x1) * dir >= 0.0) return accepted;
            if ((x + h - x1) * dir > 0.0) h = x1 - x;

            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
            rhs(x + c2 * h, ytmp, k2);
            for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            rhs(x + c3 * h, ytmp, k3);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            rhs(x + c4 * h, ytmp, k4);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            rhs(x + c5 * h, ytmp, k5);
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] +
                          h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            rhs(x + h, ytmp, k6);
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = y[i] +
                          h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            rhs(x + h, ynew, k7);

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                               e7 * k7[i]);
                const double sc =
                    abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                const double e = std::abs(yerr[i]) / sc;
                err = std::max(err, e);
            }

            if (err <= 1.0 || std::abs(h) <= 1e-15 * (std::abs(x) + 1.0)) {
                x += h;
                y = ynew;
                k1 = k7;  // FSAL
                ++accepted;
                if (observer) observer(x, y);
                if (!std::isfinite(err)) throw IntegrationDiverged("non-finite RK error estimate");
                for (std::size_t i = 0; i < N; ++i)
                    if (!std::isfinite(std::real(y[i])) || !std::isfinite(std::imag(y[i])))
                        throw IntegrationDiverged("trajectory left the finite range");
            }
            const double fac =
                err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        }
        throw IntegrationDiverged("step budget exhausted before reaching the far endpoint");
    }
};

}  // namespace slx

#endif  // SLX_RK_HPP
