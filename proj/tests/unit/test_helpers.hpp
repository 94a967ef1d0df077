#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "svnet/steady_state.hpp"

namespace testutil {

/** Random subcritical channel sampled inside the parameter box of the weight invariants. */
inline svnet::SteadyProfile random_channel(std::mt19937_64& rng, double p, int cells = 100,
                                           double fraction = 0.8) {
    std::uniform_real_distribution<double> uH(0.6, 5.0), uQ(0.2, 3.0), uC(1e-4, 5e-3);
    for (;;) {
        const double H0 = uH(rng), Q = uQ(rng), C = uC(rng);
        if (H0 < 1.1 * svnet::critical_depth(Q, 9.81)) continue;
        svnet::ChannelSpec s;
        s.friction = C;
        s.friction_exponent = p;
        s.cells = cells;
        s.length = fraction * svnet::blowup_bound(H0, Q, s);
        return svnet::integrate_channel_steady(H0, Q, s);
    }
}

/** Adaptive Simpson quadrature. */
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, double whole, double tol, int d) {
            const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
            if (d <= 0 || std::abs(left + right - whole) <= 15 * tol)
                return left + right + (left + right - whole) / 15;
            return rec(a, m, fa, flm, fm, left, tol / 2, d - 1) + rec(m, b, fm, frm, fb, right, tol / 2, d - 1);
        };
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

}  // namespace testutil
