#include "svnet/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "svnet/error.hpp"

namespace svnet {

Speeds eigenvalues(double H, double V, double g) {
    if (!(H > 0.0) || !(g * H - V * V > 0.0))
        throw Error(ErrorKind::SupercriticalState, "gH - V^2 must be positive");
    const double c = std::sqrt(g * H);
    return {V + c, c - V};
}

namespace {

/** Brackets multiplying the common factor; `inv_v_term` is the factor times 1/V. */
Coupling assemble(double s, double inv_v_term, double l1, double l2, double c, double p) {
    const double q = p / (2.0 * c);
    return {s * (-0.75 / l1 - q) + inv_v_term,
            s * (-0.25 / l1 + q) + inv_v_term,
            s * (0.25 / l2 - q) + inv_v_term,
            s * (0.75 / l2 + q) + inv_v_term};
}

double rel_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

Coupling coupling_friction_form(double H, double V, double C, double p, double g) {
    const auto [l1, l2] = eigenvalues(H, V, g);
    const double hp = std::pow(H, p);
    const double s = g * C * V * V / hp;
    return assemble(s, g * C * V / hp, l1, l2, std::sqrt(g * H), p);
}

Coupling coupling_gradient_form(double H, double V, double dHdx, double p, double g) {
    const auto [l1, l2] = eigenvalues(H, V, g);
    if (dHdx == 0.0) return {0.0, 0.0, 0.0, 0.0};
    const double s = -dHdx / H * l1 * l2;
    return assemble(s, s / V, l1, l2, std::sqrt(g * H), p);
}

CharCoeffs coupling_coefficients(const SteadyProfile& profile, double tol) {
    const std::size_t n = profile.H.size();
    CharCoeffs cc;
    for (auto* v : {&cc.lambda1, &cc.lambda2, &cc.gamma1, &cc.delta1, &cc.gamma2, &cc.delta2}) v->resize(n);
    const double C = profile.friction, p = profile.friction_exponent, g = profile.g;
    for (std::size_t k = 0; k < n; ++k) {
        const double H = profile.H[k], V = profile.V[k];
        const auto sp = eigenvalues(H, V, g);
        cc.lambda1[k] = sp.lambda1;
        cc.lambda2[k] = sp.lambda2;
        const Coupling a = coupling_friction_form(H, V, C, p, g);
        const Coupling b = coupling_gradient_form(H, V, steady_rhs(H, profile.Q, C, p, g), p, g);
        cc.gamma1[k] = a.gamma1;
        cc.delta1[k] = a.delta1;
        cc.gamma2[k] = a.gamma2;
        cc.delta2[k] = a.delta2;
        cc.form_gap = std::max({cc.form_gap, rel_gap(a.gamma1, b.gamma1), rel_gap(a.delta1, b.delta1),
                                rel_gap(a.gamma2, b.gamma2), rel_gap(a.delta2, b.delta2)});
    }
    if (cc.form_gap > tol)
        throw Error(ErrorKind::FormMismatch,
                    "coefficient forms differ by " + std::to_string(cc.form_gap), profile.channel);
    return cc;
}

std::pair<double, double> riemann_forward(double h, double v, double H_star, double g) {
    const double a = std::sqrt(g / H_star);
    return {v + a * h, v - a * h};
}

std::pair<double, double> riemann_inverse(double y1, double y2, double H_star, double g) {
    const double a = std::sqrt(g / H_star);
    return {(y1 - y2) / (2.0 * a), 0.5 * (y1 + y2)};
}

std::pair<double, double> nonlinear_change(double H, double V, double H_star, double V_star, double g) {
    if (!(H > 0.0) || !(H_star > 0.0)) throw Error(ErrorKind::NegativeDepth, "depth must be positive");
    const double dv = V - V_star;
    const double w = 2.0 * (std::sqrt(g * H) - std::sqrt(g * H_star));
    return {dv + w, dv - w};
}

std::pair<double, double> nonlinear_inverse(double y1, double y2, double H_star, double V_star, double g) {
    if (!(H_star > 0.0)) throw Error(ErrorKind::NegativeDepth, "depth must be positive");
    const double root = std::sqrt(H_star) + (y1 - y2) / (4.0 * std::sqrt(g));
    if (!(root > 0.0)) throw Error(ErrorKind::NegativeDepth, "transformed depth is not positive");
    return {root * root, V_star + 0.5 * (y1 + y2)};
}

}  // namespace svnet
