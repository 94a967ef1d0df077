#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace svnet {

template <std::size_t N>
using OdeState = std::array<double, N>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double min_step = 1e-13;  ///< relative to the integration span
    long max_steps = 5'000'000;
};

enum class OdeStatus { Completed, Stopped, StepUnderflow, MaxSteps };

template <std::size_t N>
struct OdeRun {
    OdeStatus status = OdeStatus::Completed;
    double x = 0.0;        ///< last accepted abscissa
    OdeState<N> y{};       ///< state at `x`
    double next_step = 0;  ///< suggested step for a continuation
    long steps = 0;
};

/**
 * Adaptive Dormand-Prince 5(4) integration from x0 to x1 (x1 > x0).
 *
 * `rhs(x, y, dy)` returns false when `y` lies outside the domain of the
 * right-hand side; the step is then rejected and shrunk.
 * `accept(x, y)` is called after each accepted step; returning false stops
 * the run and reports the previous accepted point.
 */
template <std::size_t N, class Rhs, class Accept>
OdeRun<N> dopri5(Rhs&& rhs, Accept&& accept, double x0, const OdeState<N>& y0, double x1,
                 const OdeOptions& opt = {}, double h0 = 0.0) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeRun<N> run;
    run.x = x0;
    run.y = y0;
    const double span = x1 - x0;
    if (!(span > 0.0)) return run;
    const double hmin = opt.min_step * std::max(span, std::abs(x1));
    double h = h0 > 0.0 ? std::min(h0, span) : span * 1e-3;

    OdeState<N> k1, k2, k3, k4, k5, k6, k7, yt, ynew;
    if (!rhs(run.x, run.y, k1)) {
        run.status = OdeStatus::StepUnderflow;
        return run;
    }
    while (run.x < x1) {
        if (run.steps >= opt.max_steps) {
            run.status = OdeStatus::MaxSteps;
            return run;
        }
        bool last = false;
        if (run.x + h >= x1 || x1 - (run.x + h) < hmin) {
            h = x1 - run.x;
            last = true;
        }
        auto stage = [&](OdeState<N>& out, auto&& combine, double xs) {
            for (std::size_t i = 0; i < N; ++i) yt[i] = run.y[i] + h * combine(i);
            return rhs(xs, yt, out);
        };
        const double x = run.x;
        bool ok = stage(k2, [&](std::size_t i) { return a21 * k1[i]; }, x + c2 * h) &&
                  stage(k3, [&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, x + c3 * h) &&
                  stage(k4, [&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, x + c4 * h) &&
                  stage(k5, [&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }, x + c5 * h) &&
                  stage(k6, [&](std::size_t i) {
                      return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i];
                  }, x + h);
        double err = 0.0;
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ynew[i] = run.y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            const double xn = last ? x1 : x + h;
            ok = rhs(xn, ynew, k7);
            if (ok) {
                for (std::size_t i = 0; i < N; ++i) {
                    const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                    const double sc = opt.atol + opt.rtol * std::max(std::abs(run.y[i]), std::abs(ynew[i]));
                    err += (ei / sc) * (ei / sc);
                }
                err = std::sqrt(err / static_cast<double>(N));
                ok = std::isfinite(err);
            }
        }
        if (!ok) {
            h *= 0.25;
            if (h < hmin) {
                run.status = OdeStatus::StepUnderflow;
                return run;
            }
            continue;
        }
        if (err <= 1.0) {
            const double xn = last ? x1 : x + h;
            if (!accept(xn, ynew)) {
                run.status = OdeStatus::Stopped;
                return run;
            }
            run.x = xn;
            run.y = ynew;
            k1 = k7;
            ++run.steps;
            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            run.next_step = h * std::clamp(fac, 0.2, 5.0);
            h = run.next_step;
        } else {
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
            if (h < hmin) {
                run.status = OdeStatus::StepUnderflow;
                return run;
            }
        }
    }
    return run;
}

}  // namespace svnet
