#include "svnet/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svnet/error.hpp"
#include "svnet/ode.hpp"
#include "svnet/quadrature.hpp"

namespace svnet {

PhiProfiles phi_profiles(const CharCoeffs& cc, double fine_step) {
    const std::size_t n = cc.lambda1.size();
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        a[k] = cc.gamma1[k] / cc.lambda1[k];
        b[k] = cc.delta2[k] / cc.lambda2[k];
    }
    const auto ia = cumulative_simpson(a, fine_step);
    const auto ib = cumulative_simpson(b, fine_step);
    PhiProfiles out;
    out.phi1.resize(n);
    out.phi2.resize(n);
    out.phi.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.phi1[k] = std::exp(ia[k]);
        out.phi2[k] = std::exp(-ib[k]);
        out.phi[k] = std::exp(ia[k] + ib[k]);
    }
    return out;
}

std::vector<double> eta_zero(const CharCoeffs& cc, const PhiProfiles& phi) {
    std::vector<double> out(cc.lambda1.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = cc.lambda2[k] / cc.lambda1[k] * phi.phi[k];
    return out;
}

double eta_zero_residual(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi) {
    double worst = 0.0;
    const double g = prof.g;
    for (std::size_t k = 0; k < prof.H.size(); ++k) {
        const double H = prof.H[k], V = prof.V[k];
        const double Hx = steady_rhs(H, prof.Q, prof.friction, prof.friction_exponent, g);
        const double c = std::sqrt(g * H);
        const double cx = 0.5 * g * Hx / c;
        const double Vx = -V * Hx / H;
        const double l1 = cc.lambda1[k], l2 = cc.lambda2[k];
        const double l1x = Vx + cx, l2x = cx - Vx;
        const double r = l2 / l1;
        const double rx = (l2x * l1 - l2 * l1x) / (l1 * l1);
        const double ph = phi.phi[k];
        const double phx = ph * (cc.gamma1[k] / l1 + cc.delta2[k] / l2);
        const double eta0 = r * ph;
        const double lhs = rx * ph + r * phx;
        const double rhs = std::abs(cc.delta1[k] * ph / l1 + cc.gamma2[k] / (l2 * ph) * eta0 * eta0);
        if (rhs > 0.0 || lhs != 0.0) worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), rhs));
    }
    return worst;
}

double m_value(double H, double H0, double Q, double p, double g) {
    if (!(Q > 0.0)) throw Error(ErrorKind::DegenerateFlux, "m is undefined for zero flux");
    const double sg = std::sqrt(g);
    const double A = sg / ((3.0 + p) * Q) * std::pow(H, 3.0 + p) +
                     (1.0 + p) * sg / (2.0 * (3.0 + p) * Q) * std::pow(H0, 3.0 + p) +
                     Q / (2.0 * sg) * (std::pow(H, p) - std::pow(H0, p));
    const double t = 0.5 * std::pow(H, 1.5 + p);
    const double den = A - t;
    if (!(den > 0.0)) throw Error(ErrorKind::RiccatiBlowup, "closed-form denominator is not positive");
    return (A + t) / den;
}

std::vector<double> m_profile(const SteadyProfile& prof) {
    std::vector<double> out(prof.H.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = m_value(prof.H[k], prof.H0(), prof.Q, prof.friction_exponent, prof.g);
    return out;
}

std::vector<double> eta_bar_closed(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi) {
    auto m = m_profile(prof);
    auto e0 = eta_zero(cc, phi);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] *= e0[k];
    return m;
}

namespace {

/** State (H, ln phi, ln eta); the log form keeps relative accuracy when phi grows by many decades. */
struct RiccatiRhs {
    double Q, C, p, g, eps;
    bool operator()(double, const OdeState<3>& y, OdeState<3>& dy) const {
        const double H = y[0];
        const double V = Q / H;
        const double margin = g * H - V * V;
        if (!(H > 0.0) || !(margin > 0.0)) return false;
        const double l1 = std::sqrt(g * H) + V, l2 = std::sqrt(g * H) - V;
        const Coupling c = coupling_friction_form(H, V, C, p, g);
        dy[0] = (C == 0.0 || Q == 0.0) ? 0.0 : -g * C * V * V / (std::pow(H, p - 1.0) * margin);
        dy[1] = c.gamma1 / l1 + c.delta2 / l2;
        const double r = std::exp(y[1] - y[2]);  // phi / eta
        dy[2] = std::abs(c.delta1 * r / l1 + c.gamma2 / (l2 * r)) + eps * std::exp(-y[2]);
        return std::isfinite(dy[2]);
    }
};

}  // namespace

std::vector<double> riccati_profile(const SteadyProfile& prof, double eps, double eta_init, double tol) {
    RiccatiRhs rhs{prof.Q, prof.friction, prof.friction_exponent, prof.g, eps};
    // Blow-up means leaving the envelope max(1, phi) by twelve decades.
    const double cap = std::log(1e12);
    auto bounded = [cap](double, const OdeState<3>& y) { return y[2] <= cap + std::max(0.0, y[1]); };
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol;
    std::vector<double> out(prof.x.size());
    out[0] = eta_init;
    OdeState<3> y{prof.H0(), 0.0, std::log(eta_init)};
    double h = 0.0;
    for (std::size_t k = 1; k < prof.x.size(); ++k) {
        auto run = dopri5<3>(rhs, bounded, prof.x[k - 1], y, prof.x[k], opt, h);
        if (run.status != OdeStatus::Completed)
            throw Error(ErrorKind::RiccatiBlowup,
                        "channel " + std::to_string(prof.channel) + ": Riccati solution fails near x = " +
                        std::to_string(run.x), prof.channel, run.x);
        y = run.y;
        if (run.next_step > 0.0) h = run.next_step;
        out[k] = std::exp(y[2]);
    }
    return out;
}

std::vector<double> eta_bar_ode_oracle(const SteadyProfile& prof, double tol) {
    return riccati_profile(prof, 0.0, 1.0, tol);
}

QuadratureCheck quadrature_check(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi) {
    const std::size_t n = prof.x.size();
    const double h = prof.fine_step();
    std::vector<double> inner(n), outer(n);
    for (std::size_t k = 0; k < n; ++k) inner[k] = 2.0 * cc.gamma2[k] / cc.lambda1[k];
    const auto ie = cumulative_simpson(inner, h);
    for (std::size_t k = 0; k < n; ++k) outer[k] = std::exp(ie[k]) * cc.gamma2[k] / (cc.lambda2[k] * phi.phi[k]);
    QuadratureCheck r;
    r.lhs = cumulative_simpson(outer, h);
    const double d = cc.lambda1[0] - cc.lambda2[0];
    r.rhs = d > 0.0 ? cc.lambda1[0] / d : std::numeric_limits<double>::infinity();
    r.margin.resize(n);
    r.min_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        r.margin[k] = r.rhs - r.lhs[k];
        r.min_margin = std::min(r.min_margin, r.margin[k]);
    }
    return r;
}

std::vector<double> eta_eps(const SteadyProfile& prof, const CharCoeffs& cc, double eps, bool is_trunk) {
    const double init = (is_trunk ? cc.lambda2[0] / cc.lambda1[0] : 1.0) + eps;
    try {
        return riccati_profile(prof, eps, init);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::RiccatiBlowup) throw;
        throw Error(ErrorKind::EpsilonTooLarge,
                    "channel " + std::to_string(prof.channel) + ": eta blows up for eps = " + std::to_string(eps),
                    prof.channel, e.position());
    }
}

WeightPair weights(const CharCoeffs& cc, std::span<const double> phi1, std::span<const double> phi2,
                   std::span<const double> eta, double alpha) {
    WeightPair w;
    w.f1.resize(eta.size());
    w.f2.resize(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) {
        w.f1[k] = alpha * phi1[k] * phi1[k] / (cc.lambda1[k] * eta[k]);
        w.f2[k] = alpha * phi2[k] * phi2[k] * eta[k] / cc.lambda2[k];
    }
    return w;
}

void WeightSet::set_alpha(double a) {
    for (std::size_t k = 0; k < f1.size(); ++k) {
        f1[k] *= a / alpha;
        f2[k] *= a / alpha;
    }
    alpha = a;
}

WeightSet build_weight_set(const SteadyProfile& prof, const CharCoeffs& cc, double eps, bool is_trunk) {
    WeightSet w;
    w.channel = prof.channel;
    w.is_trunk = is_trunk;
    w.epsilon = eps;
    w.x = prof.x;
    w.phi = phi_profiles(cc, prof.fine_step());
    w.eta0 = eta_zero(cc, w.phi);
    if (prof.Q > 0.0) {
        w.m = m_profile(prof);
        w.eta_bar = w.eta0;
        for (std::size_t k = 0; k < w.m.size(); ++k) w.eta_bar[k] *= w.m[k];
    }
    w.eta = eta_eps(prof, cc, eps, is_trunk);
    const std::size_t n = w.x.size();
    w.eta_prime.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double G = cc.delta1[k] * w.phi.phi[k] / cc.lambda1[k];
        const double I = cc.gamma2[k] / (cc.lambda2[k] * w.phi.phi[k]);
        w.eta_prime[k] = std::abs(G + I * w.eta[k] * w.eta[k]) + eps;
    }
    auto f = weights(cc, w.phi.phi1, w.phi.phi2, w.eta, 1.0);
    w.f1 = std::move(f.f1);
    w.f2 = std::move(f.f2);
    w.Z_tilde.resize(n);
    w.W_tilde.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double a = cc.lambda1[k] * w.f1[k], b = cc.lambda2[k] * w.f2[k];
        w.Z_tilde[k] = a - b;
        w.W_tilde[k] = a + b;
    }
    return w;
}

double lyapunov_value(std::span<const double> x, std::span<const double> f1, std::span<const double> f2,
                      std::span<const double> y1, std::span<const double> y2) {
    std::vector<double> e(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) e[k] = f1[k] * y1[k] * y1[k] + f2[k] * y2[k] * y2[k];
    return trapezoid(x, e);
}

}  // namespace svnet
