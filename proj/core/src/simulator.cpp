#include "svnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "svnet/error.hpp"
#include "svnet/report.hpp"

namespace svnet {

namespace {

double smoothstep(double s) {
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

/** Three-point derivative on a nonuniform grid, one-sided at both ends. */
std::vector<double> nodal_derivative(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> d(n);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double h1 = x[k] - x[k - 1], h2 = x[k + 1] - x[k];
        d[k] = -h2 / (h1 * (h1 + h2)) * f[k - 1] + (h2 - h1) / (h1 * h2) * f[k] + h1 / (h2 * (h1 + h2)) * f[k + 1];
    }
    {
        const double h1 = x[1] - x[0], h2 = x[2] - x[1];
        d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
    }
    {
        const double h1 = x[n - 2] - x[n - 3], h2 = x[n - 1] - x[n - 2];
        d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
                   (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
    }
    return d;
}

/** Momentum flux deviation at steady depth Hs and discharge Q. */
double momentum_flux_dev(double dh, double dq, double Hs, double Q, double g) {
    return ((2 * Q * dq + dq * dq) * Hs - Q * Q * dh) / (Hs * (Hs + dh)) + 0.5 * g * dh * (2 * Hs + dh);
}

std::string at_time(double t) { return " at t = " + format_number(t) + " s"; }

}  // namespace

double tapered_bump(double x, double length, double dx, const ChannelBump& b) {
    const double z = (x / length - b.center) / b.width;
    const double d = std::min(x, length - x);
    return std::exp(-z * z) * smoothstep((d - 2 * dx) / (2 * dx));
}

NetworkSimulator::NetworkSimulator(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                                   const std::map<int, double>& gains, const SimOptions& opt)
    : opt_(opt) {
    const auto report = validate_topology(topo);
    if (profiles.size() != topo.channels.size())
        throw Error(ErrorKind::InvalidTopology, "one steady profile per channel is required");
    for (int id : report.terminal)
        if (!gains.count(id)) throw Error(ErrorKind::MissingGain, "no gain for terminal channel", id);
    g_ = topo.gravity();
    root_ = topo.index_of(topo.root_channel);

    chans_.resize(topo.channels.size());
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        auto& c = chans_[i];
        const auto& prof = profiles[i];
        c.id = topo.channels[i].id;
        c.prof = prof;
        c.n = static_cast<std::size_t>(prof.cells);
        c.dx = prof.dx();
        c.C = prof.friction;
        c.p = prof.friction_exponent;
        const auto cc = coupling_coefficients(prof);
        for (std::size_t j = 0; j < c.n; ++j) {
            const std::size_t k = prof.center(j);
            c.xc.push_back(prof.x[k]);
            c.Hc.push_back(prof.H[k]);
            c.Vc.push_back(prof.V[k]);
            c.l1.push_back(cc.lambda1[k]);
            c.l2.push_back(cc.lambda2[k]);
            c.g1.push_back(cc.gamma1[k]);
            c.d1.push_back(cc.delta1[k]);
            c.g2.push_back(cc.gamma2[k]);
            c.d2.push_back(cc.delta2[k]);
        }
        {
            std::vector<std::size_t> fine{0};
            for (std::size_t j = 0; j < c.n; ++j) fine.push_back(prof.center(j));
            fine.push_back(prof.face(c.n));
            const std::array<const std::vector<double>*, 6> src{&cc.lambda1, &cc.lambda2, &cc.gamma1,
                                                                &cc.delta1,  &cc.gamma2,  &cc.delta2};
            for (std::size_t q = 0; q < 6; ++q)
                for (std::size_t k : fine) c.node_coeffs[q].push_back((*src[q])[k]);
        }
        for (std::size_t f = 0; f <= c.n; ++f) {
            c.Hf.push_back(prof.H[prof.face(f)]);
            c.Vf.push_back(prof.V[prof.face(f)]);
        }
        c.absA.resize(c.n + 1);
        for (std::size_t f = 0; f <= c.n; ++f) {
            const double V = c.Vf[f], s = std::sqrt(g_ * c.Hf[f]);
            const double m1 = V + s, m2 = V - s, a1 = std::abs(m1), a2 = std::abs(m2);
            const double w = 1.0 / (m2 - m1);
            c.absA[f] = {w * (a1 * m2 - a2 * m1), w * (a2 - a1), w * m1 * m2 * (a1 - a2), w * (a2 * m2 - a1 * m1)};
        }
        if (topo.is_terminal(c.id)) c.k = gains.at(c.id);
    }
    for (const auto& junction : topo.junctions) {
        JunctionLink link;
        link.in = topo.index_of(junction.incoming);
        chans_[link.in].junction_in = static_cast<int>(links_.size());
        for (int id : junction.outgoing) {
            const std::size_t j = topo.index_of(id);
            link.out.push_back(j);
            chans_[j].junction_out = static_cast<int>(links_.size());
        }
        links_.push_back(std::move(link));
    }

    a_.resize(chans_.size());
    b_.resize(chans_.size());
    f1_.resize(chans_.size());
    f2_.resize(chans_.size());
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        a_[i].assign(chans_[i].n, 0.0);
        b_[i].assign(chans_[i].n, 0.0);
        f1_[i].assign(chans_[i].n + 2, 1.0);
        f2_[i].assign(chans_[i].n + 2, 1.0);
    }
    perturb({});
}

void NetworkSimulator::perturb(const Perturbation& p) {
    std::vector<ChannelBump> bumps = p.bumps;
    if (bumps.empty())
        for (const auto& c : chans_) bumps.push_back(ChannelBump{c.id});
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        std::fill(a_[i].begin(), a_[i].end(), 0.0);
        std::fill(b_[i].begin(), b_[i].end(), 0.0);
    }
    if (p.amplitude != 0.0) {
        for (const auto& bump : bumps) {
            auto it = std::find_if(chans_.begin(), chans_.end(), [&](const Channel& c) { return c.id == bump.channel; });
            if (it == chans_.end()) throw Error(ErrorKind::InvalidTopology, "perturbation names an unknown channel",
                                                bump.channel);
            const std::size_t i = static_cast<std::size_t>(it - chans_.begin());
            const auto& c = *it;
            for (std::size_t j = 0; j < c.n; ++j) {
                const double w = tapered_bump(c.xc[j], c.prof.length, c.dx, bump);
                const double h = p.amplitude * bump.weight_h * c.Hc[j] * w;
                const double v = p.amplitude * bump.weight_v * std::sqrt(g_ * c.Hc[j]) * w;
                if (opt_.mode == SimMode::Linear) {
                    const double s = std::sqrt(g_ / c.Hc[j]);
                    a_[i][j] += v + h * s;
                    b_[i][j] += v - h * s;
                } else {
                    const double dh = a_[i][j], dq = b_[i][j];
                    const double H = c.Hc[j] + dh;
                    const double V = c.Vc[j] + (dq - c.Vc[j] * dh) / H;
                    const double H1 = H + h, V1 = V + v;
                    a_[i][j] = H1 - c.Hc[j];
                    b_[i][j] = H1 * V1 - c.prof.Q;
                }
            }
        }
    }
    check_state(a_, b_);
    if (steps_ == 0) {
        double rate = 0.0;
        for (std::size_t i = 0; i < chans_.size(); ++i) {
            const auto& c = chans_[i];
            for (std::size_t j = 0; j < c.n; ++j) {
                double speed = c.l1[j];
                if (opt_.mode == SimMode::Nonlinear) {
                    const double H = c.Hc[j] + a_[i][j];
                    speed = std::abs((c.prof.Q + b_[i][j]) / H) + std::sqrt(g_ * H);
                }
                rate = std::max(rate, speed / c.dx);
            }
        }
        dt_ = opt_.cfl / rate;
    }
}

void NetworkSimulator::set_weights(const std::vector<WeightSet>& weights) {
    if (weights.size() != chans_.size())
        throw Error(ErrorKind::InvalidTopology, "one weight set per channel is required");
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        const auto& c = chans_[i];
        const auto& w = weights[i];
        f1_[i].clear();
        f2_[i].clear();
        auto push = [&](std::size_t k) {
            f1_[i].push_back(w.f1[k]);
            f2_[i].push_back(w.f2[k]);
        };
        push(0);
        for (std::size_t j = 0; j < c.n; ++j) push(c.prof.center(j));
        push(c.prof.face(c.n));
    }
}

double NetworkSimulator::face_dh_root(const Channel& c, double Y2) const {
    const double Hs = c.Hf[0], Q = c.prof.Q, sg = std::sqrt(g_);
    double dh = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double H = Hs + dh;
        const double r = -Q * dh / (Hs * H) - 2 * sg * dh / (std::sqrt(H) + std::sqrt(Hs)) - Y2;
        const double dr = -(Q / (H * H) + std::sqrt(g_ / H));
        double step = r / dr;
        while (Hs + dh - step <= 0.0) step *= 0.5;
        dh -= step;
        if (std::abs(step) <= 1e-15 * Hs) return dh;
    }
    throw Error(ErrorKind::RootSolveFailure, "root face solve did not converge", c.id, 0.0);
}

double NetworkSimulator::face_dh_terminal(const Channel& c, double Y1) const {
    const double Hs = c.Hf[c.n], sg = std::sqrt(g_);
    double dh = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double H = Hs + dh;
        const double r = c.k * dh + 2 * sg * dh / (std::sqrt(H) + std::sqrt(Hs)) - Y1;
        const double dr = c.k + std::sqrt(g_ / H);
        if (dr == 0.0) break;
        double step = r / dr;
        while (Hs + dh - step <= 0.0) step *= 0.5;
        dh -= step;
        if (std::abs(step) <= 1e-15 * Hs) return dh;
    }
    throw Error(ErrorKind::TerminalSolveFailure, "terminal face solve did not converge", c.id, c.prof.length);
}

void NetworkSimulator::solve_faces(const Fields& a, const Fields& b, std::vector<Face>& f0,
                                   std::vector<Face>& fL) const {
    const std::size_t nc = chans_.size();
    f0.assign(nc, {});
    fL.assign(nc, {});
    const double sg = std::sqrt(g_);
    const bool linear = opt_.mode == SimMode::Linear;

    // Outgoing invariants from the nearest cell: Y1 at x = L, Y2 at x = 0.
    auto invariants = [&](std::size_t i, std::size_t j) {
        const auto& c = chans_[i];
        if (linear) return std::pair{a[i][j], b[i][j]};
        const double dh = a[i][j], H = c.Hc[j] + dh;
        const double dV = (b[i][j] - c.Vc[j] * dh) / H;
        const double t = 2 * sg * dh / (std::sqrt(H) + std::sqrt(c.Hc[j]));
        return std::pair{dV + t, dV - t};
    };

    for (std::size_t i = 0; i < nc; ++i) {
        const auto& c = chans_[i];
        if (i == root_) {
            const double Y2 = invariants(i, 0).second;
            if (linear) {
                const double V = c.Vf[0];
                double y1 = -Y2;
                if (V != 0.0) {
                    const double r = std::sqrt(g_ * c.Hf[0]) / V;
                    y1 = Y2 * (1 - r) / (1 + r);
                }
                f0[i] = {y1, Y2};
            } else {
                f0[i] = {face_dh_root(c, Y2), 0.0};
            }
        }
        if (c.junction_in < 0) {
            const double Y1 = invariants(i, c.n - 1).first;
            if (linear) {
                const double s = std::sqrt(g_ / c.Hf[c.n]);
                fL[i] = {Y1, Y1 * (c.k - s) / (c.k + s)};
            } else {
                const double dh = face_dh_terminal(c, Y1);
                const double H = c.Hf[c.n] + dh;
                fL[i] = {dh, dh * c.Vf[c.n] + H * c.k * dh};
            }
        }
    }

    for (const auto& link : links_) {
        const auto& ci = chans_[link.in];
        const double Hs = ci.Hf[ci.n];
        const double Y1 = invariants(link.in, ci.n - 1).first;
        double sumY2 = 0.0;
        for (std::size_t j : link.out) sumY2 += invariants(j, 0).second;
        const double n = static_cast<double>(link.out.size());
        if (linear) {
            const double s = std::sqrt(g_ / Hs);
            const double h = (Y1 - sumY2) / (s * (1 + n));
            fL[link.in] = {Y1, Y1 - 2 * h * s};
            for (std::size_t j : link.out) {
                const double Y2 = b[j][0];
                f0[j] = {Y2 + 2 * h * s, Y2};
            }
        } else {
            const double s = (Y1 - sumY2) / (1 + n);
            const double tau = s / (2 * sg);
            if (!(std::sqrt(Hs) + tau > 0.0))
                throw Error(ErrorKind::JunctionDivergence, "junction depth became non-positive", ci.id, ci.prof.length);
            const double dh = 2 * std::sqrt(Hs) * tau + tau * tau;
            const double H = Hs + dh;
            fL[link.in] = {dh, dh * ci.Vf[ci.n] + H * (Y1 - s)};
            for (std::size_t j : link.out) {
                const double Y2 = invariants(j, 0).second;
                f0[j] = {dh, dh * chans_[j].Vf[0] + H * (Y2 + s)};
            }
        }
    }
}

void NetworkSimulator::rates(const Fields& a, const Fields& b, Fields& ra, Fields& rb, double& outflow) const {
    std::vector<Face> f0, fL;
    solve_faces(a, b, f0, fL);
    outflow = 0.0;
    ra.resize(chans_.size());
    rb.resize(chans_.size());
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        const auto& c = chans_[i];
        const auto& A = a[i];
        const auto& Bv = b[i];
        ra[i].assign(c.n, 0.0);
        rb[i].assign(c.n, 0.0);
        if (opt_.mode == SimMode::Linear) {
            for (std::size_t j = 0; j < c.n; ++j) {
                const double y1up = j == 0 ? f0[i].a : A[j - 1];
                const double y2up = j + 1 == c.n ? fL[i].b : Bv[j + 1];
                ra[i][j] = -c.l1[j] * (A[j] - y1up) / c.dx - c.g1[j] * A[j] - c.d1[j] * Bv[j];
                rb[i][j] = c.l2[j] * (y2up - Bv[j]) / c.dx - c.g2[j] * A[j] - c.d2[j] * Bv[j];
            }
            continue;
        }
        const double Q = c.prof.Q;
        std::vector<double> F1(c.n + 1), F2(c.n + 1);
        F1[0] = f0[i].b;
        F2[0] = momentum_flux_dev(f0[i].a, f0[i].b, c.Hf[0], Q, g_);
        F1[c.n] = fL[i].b;
        F2[c.n] = momentum_flux_dev(fL[i].a, fL[i].b, c.Hf[c.n], Q, g_);
        for (std::size_t f = 1; f < c.n; ++f) {
            const double hl = A[f - 1], ql = Bv[f - 1], hr = A[f], qr = Bv[f];
            const double Hs = c.Hf[f];
            const auto& M = c.absA[f];
            const double dh = hr - hl, dq = qr - ql;
            F1[f] = 0.5 * (ql + qr) - 0.5 * (M[0] * dh + M[1] * dq);
            F2[f] = 0.5 * (momentum_flux_dev(hl, ql, Hs, Q, g_) + momentum_flux_dev(hr, qr, Hs, Q, g_)) -
                    0.5 * (M[2] * dh + M[3] * dq);
        }
        for (std::size_t j = 0; j < c.n; ++j) {
            ra[i][j] = -(F1[j + 1] - F1[j]) / c.dx;
            rb[i][j] = -(F2[j + 1] - F2[j]) / c.dx;
            if (c.C != 0.0) {
                const double H = c.Hc[j] + A[j], q = Q + Bv[j];
                const double e = 1.0 + c.p;
                rb[i][j] -= g_ * c.C * (q * q - Q * Q * std::pow(H / c.Hc[j], e)) / std::pow(H, e);
            }
        }
        if (c.junction_in < 0) outflow += F1[c.n];
        if (i == root_) outflow -= F1[0];
    }
}

void NetworkSimulator::check_state(const Fields& a, const Fields& b) const {
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        const auto& c = chans_[i];
        for (std::size_t j = 0; j < c.n; ++j) {
            if (!std::isfinite(a[i][j]) || !std::isfinite(b[i][j]))
                throw Error(ErrorKind::SubcriticalLoss, "non-finite state" + at_time(t_), c.id, c.xc[j],
                            static_cast<int>(j));
            if (opt_.mode == SimMode::Linear) continue;
            const double H = c.Hc[j] + a[i][j];
            const double V = (c.prof.Q + b[i][j]) / H;
            if (!(H > 0.0) || !(g_ * H - V * V > 0.0))
                throw Error(ErrorKind::SubcriticalLoss, "flow is no longer subcritical" + at_time(t_), c.id, c.xc[j],
                            static_cast<int>(j));
        }
    }
}

double NetworkSimulator::junction_residual(const Fields& a, const Fields& b) const {
    std::vector<Face> f0, fL;
    solve_faces(a, b, f0, fL);
    double worst = 0.0;
    for (const auto& link : links_) {
        const auto& ci = chans_[link.in];
        double res = 0.0;
        if (opt_.mode == SimMode::Linear) {
            res = 0.5 * (fL[link.in].a + fL[link.in].b);
            for (std::size_t j : link.out) res -= 0.5 * (f0[j].a + f0[j].b);
            res *= ci.Hf[ci.n];
        } else {
            res = ci.prof.Q + fL[link.in].b;
            for (std::size_t j : link.out) res -= chans_[j].prof.Q + f0[j].b;
        }
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

void NetworkSimulator::step() {
    if (opt_.mode == SimMode::Nonlinear) {
        double rate = 0.0;
        for (std::size_t i = 0; i < chans_.size(); ++i) {
            const auto& c = chans_[i];
            for (std::size_t j = 0; j < c.n; ++j) {
                const double H = c.Hc[j] + a_[i][j];
                rate = std::max(rate, (std::abs((c.prof.Q + b_[i][j]) / H) + std::sqrt(g_ * H)) / c.dx);
            }
        }
        if (dt_ * rate > 1.0)
            throw Error(ErrorKind::CflViolation, "CFL number " + format_number(dt_ * rate) + " exceeds 1" + at_time(t_));
    }
    const double m0 = mass_deviation();
    Fields ra, rb, a1 = a_, b1 = b_, ra1, rb1;
    double out0 = 0.0, out1 = 0.0;
    try {
        rates(a_, b_, ra, rb, out0);
        for (std::size_t i = 0; i < chans_.size(); ++i)
            for (std::size_t j = 0; j < chans_[i].n; ++j) {
                a1[i][j] += dt_ * ra[i][j];
                b1[i][j] += dt_ * rb[i][j];
            }
        check_state(a1, b1);
        rates(a1, b1, ra1, rb1, out1);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::SubcriticalLoss) throw;
        throw Error(e.kind(), std::string(e.what()) + at_time(t_), e.channel(), e.position(), e.cell());
    }
    for (std::size_t i = 0; i < chans_.size(); ++i)
        for (std::size_t j = 0; j < chans_[i].n; ++j) {
            a_[i][j] = 0.5 * (a_[i][j] + a1[i][j] + dt_ * ra1[i][j]);
            b_[i][j] = 0.5 * (b_[i][j] + b1[i][j] + dt_ * rb1[i][j]);
        }
    t_ += dt_;
    ++steps_;
    check_state(a_, b_);
    if (opt_.mode == SimMode::Nonlinear) {
        const double res = std::abs((mass_deviation() - m0) / dt_ + 0.5 * (out0 + out1));
        max_mass_residual_ = std::max(max_mass_residual_, res);
    }
    max_junction_residual_ = std::max(max_junction_residual_, junction_residual(a_, b_));
}

void NetworkSimulator::advance(long n) {
    for (long s = 0; s < n; ++s) step();
}

std::vector<double> NetworkSimulator::cell_centers(std::size_t i) const { return chans_[i].xc; }

std::vector<double> NetworkSimulator::h(std::size_t i) const {
    const auto& c = chans_[i];
    std::vector<double> out(c.n);
    for (std::size_t j = 0; j < c.n; ++j)
        out[j] = opt_.mode == SimMode::Linear ? (a_[i][j] - b_[i][j]) / (2 * std::sqrt(g_ / c.Hc[j])) : a_[i][j];
    return out;
}

std::vector<double> NetworkSimulator::v(std::size_t i) const {
    const auto& c = chans_[i];
    std::vector<double> out(c.n);
    for (std::size_t j = 0; j < c.n; ++j)
        out[j] = opt_.mode == SimMode::Linear ? 0.5 * (a_[i][j] + b_[i][j])
                                              : (b_[i][j] - c.Vc[j] * a_[i][j]) / (c.Hc[j] + a_[i][j]);
    return out;
}

NodeFields NetworkSimulator::node_fields(std::size_t i) const {
    std::vector<Face> f0, fL;
    solve_faces(a_, b_, f0, fL);
    const auto& c = chans_[i];
    NodeFields nf;
    const std::size_t m = c.n + 2;
    nf.x.resize(m);
    nf.h.resize(m);
    nf.v.resize(m);
    nf.y1.resize(m);
    nf.y2.resize(m);
    auto put = [&](std::size_t k, double x, double Hs, double Vs, double A, double B) {
        nf.x[k] = x;
        if (opt_.mode == SimMode::Linear) {
            const double s = std::sqrt(g_ / Hs);
            nf.y1[k] = A;
            nf.y2[k] = B;
            nf.h[k] = (A - B) / (2 * s);
            nf.v[k] = 0.5 * (A + B);
        } else {
            const double H = Hs + A;
            nf.h[k] = A;
            nf.v[k] = (B - Vs * A) / H;
            const double t = 2 * std::sqrt(g_) * A / (std::sqrt(H) + std::sqrt(Hs));
            nf.y1[k] = nf.v[k] + t;
            nf.y2[k] = nf.v[k] - t;
        }
    };
    put(0, 0.0, c.Hf[0], c.Vf[0], f0[i].a, f0[i].b);
    for (std::size_t j = 0; j < c.n; ++j) put(j + 1, c.xc[j], c.Hc[j], c.Vc[j], a_[i][j], b_[i][j]);
    put(m - 1, c.prof.length, c.Hf[c.n], c.Vf[c.n], fL[i].a, fL[i].b);
    return nf;
}

TimeDerivatives NetworkSimulator::time_derivatives(std::size_t i) const {
    const auto nf = node_fields(i);
    const auto& c = chans_[i];
    const std::size_t m = nf.x.size();
    std::vector<double> Hs(m), Vs(m), l1(m), l2(m), g1(m), d1(m), g2(m), d2(m);
    Hs[0] = c.Hf[0];
    Vs[0] = c.Vf[0];
    Hs[m - 1] = c.Hf[c.n];
    Vs[m - 1] = c.Vf[c.n];
    for (std::size_t j = 0; j < c.n; ++j) {
        Hs[j + 1] = c.Hc[j];
        Vs[j + 1] = c.Vc[j];
    }
    TimeDerivatives td;
    if (opt_.mode == SimMode::Linear) {
        const auto& nc = c.node_coeffs;
        l1 = nc[0];
        l2 = nc[1];
        g1 = nc[2];
        d1 = nc[3];
        g2 = nc[4];
        d2 = nc[5];
        auto apply = [&](const std::vector<double>& y1, const std::vector<double>& y2, std::vector<double>& o1,
                         std::vector<double>& o2) {
            const auto dy1 = nodal_derivative(nf.x, y1), dy2 = nodal_derivative(nf.x, y2);
            o1.resize(m);
            o2.resize(m);
            for (std::size_t k = 0; k < m; ++k) {
                o1[k] = -l1[k] * dy1[k] - g1[k] * y1[k] - d1[k] * y2[k];
                o2[k] = l2[k] * dy2[k] - g2[k] * y1[k] - d2[k] * y2[k];
            }
        };
        apply(nf.y1, nf.y2, td.y1_t, td.y2_t);
        apply(td.y1_t, td.y2_t, td.y1_tt, td.y2_tt);
        return td;
    }

    const double C = c.C, p = c.p, g = g_;
    std::vector<double> H(m), V(m), dq(m), e(m), Ht(m), Vt(m), qt(m), w(m);
    for (std::size_t k = 0; k < m; ++k) {
        H[k] = Hs[k] + nf.h[k];
        V[k] = Vs[k] + nf.v[k];
        dq[k] = nf.h[k] * Vs[k] + Hs[k] * nf.v[k] + nf.h[k] * nf.v[k];
        e[k] = 0.5 * nf.v[k] * (2 * Vs[k] + nf.v[k]) + g * nf.h[k];
    }
    const auto ddq = nodal_derivative(nf.x, dq), de = nodal_derivative(nf.x, e);
    for (std::size_t k = 0; k < m; ++k) {
        Ht[k] = -ddq[k];
        const double S = C == 0.0 ? 0.0 : g * C * (V[k] * V[k] / std::pow(H[k], p) - Vs[k] * Vs[k] / std::pow(Hs[k], p));
        Vt[k] = -de[k] - S;
        qt[k] = Ht[k] * V[k] + H[k] * Vt[k];
        w[k] = V[k] * Vt[k] + g * Ht[k];
    }
    const auto dqt = nodal_derivative(nf.x, qt), dw = nodal_derivative(nf.x, w);
    td.y1_t.resize(m);
    td.y2_t.resize(m);
    td.y1_tt.resize(m);
    td.y2_tt.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double Htt = -dqt[k];
        const double St = C == 0.0 ? 0.0
                                   : g * C * (2 * V[k] * Vt[k] / std::pow(H[k], p) -
                                              p * V[k] * V[k] * Ht[k] / std::pow(H[k], p + 1));
        const double Vtt = -dw[k] - St;
        const double s = std::sqrt(g / H[k]);
        const double curv = 0.5 * std::sqrt(g) * std::pow(H[k], -1.5) * Ht[k] * Ht[k];
        td.y1_t[k] = Vt[k] + s * Ht[k];
        td.y2_t[k] = Vt[k] - s * Ht[k];
        td.y1_tt[k] = Vtt + s * Htt - curv;
        td.y2_tt[k] = Vtt - s * Htt + curv;
    }
    return td;
}

TraceSample NetworkSimulator::sample() const {
    TraceSample s;
    s.t = t_;
    double l2sum = 0.0;
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        const auto& c = chans_[i];
        const auto nf = node_fields(i);
        const auto td = time_derivatives(i);
        const double v0 = lyapunov_value(nf.x, f1_[i], f2_[i], nf.y1, nf.y2);
        s.V += v0;
        s.V_ext += v0 + lyapunov_value(nf.x, f1_[i], f2_[i], td.y1_t, td.y2_t) +
                   lyapunov_value(nf.x, f1_[i], f2_[i], td.y1_tt, td.y2_tt);
        double ci = 0.0;
        for (std::size_t k = 1; k + 1 < nf.x.size(); ++k) ci += (nf.h[k] * nf.h[k] + nf.v[k] * nf.v[k]) * c.dx;
        s.channel_l2.push_back(std::sqrt(ci));
        l2sum += ci;
        const std::size_t e = nf.x.size() - 1;
        const double lL1 = c.Vf[c.n] + std::sqrt(g_ * c.Hf[c.n]), lL2 = std::sqrt(g_ * c.Hf[c.n]) - c.Vf[c.n];
        const double l01 = c.Vf[0] + std::sqrt(g_ * c.Hf[0]), l02 = std::sqrt(g_ * c.Hf[0]) - c.Vf[0];
        s.B += f1_[i][e] * lL1 * nf.y1[e] * nf.y1[e] - f2_[i][e] * lL2 * nf.y2[e] * nf.y2[e] -
               f1_[i][0] * l01 * nf.y1[0] * nf.y1[0] + f2_[i][0] * l02 * nf.y2[0] * nf.y2[0];
    }
    s.l2 = std::sqrt(l2sum);
    return s;
}

double NetworkSimulator::max_abs_deviation() const {
    double m = 0.0;
    for (std::size_t i = 0; i < chans_.size(); ++i)
        for (std::size_t j = 0; j < chans_[i].n; ++j) m = std::max({m, std::abs(a_[i][j]), std::abs(b_[i][j])});
    return m;
}

double NetworkSimulator::mass_deviation() const {
    double m = 0.0;
    const auto hh = [&](std::size_t i) { return opt_.mode == SimMode::Linear ? h(i) : a_[i]; };
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        double s = 0.0;
        for (double x : hh(i)) s += x;
        m += s * chans_[i].dx;
    }
    return m;
}

double NetworkSimulator::net_outflow() const {
    if (opt_.mode == SimMode::Linear) {
        std::vector<Face> f0, fL;
        solve_faces(a_, b_, f0, fL);
        double out = 0.0;
        for (std::size_t i = 0; i < chans_.size(); ++i) {
            const auto& c = chans_[i];
            auto dq = [&](const Face& f, double Hs, double Vs) {
                const double s = std::sqrt(g_ / Hs);
                return Hs * 0.5 * (f.a + f.b) + Vs * (f.a - f.b) / (2 * s);
            };
            if (c.junction_in < 0) out += dq(fL[i], c.Hf[c.n], c.Vf[c.n]);
            if (i == root_) out -= dq(f0[i], c.Hf[0], c.Vf[0]);
        }
        return out;
    }
    Fields ra, rb;
    double out = 0.0;
    rates(a_, b_, ra, rb, out);
    return out;
}

void NetworkSimulator::write_snapshot(std::ostream& os) const {
    os << "channel,x,H,V,h,v\n";
    for (std::size_t i = 0; i < chans_.size(); ++i) {
        const auto& c = chans_[i];
        const auto hh = h(i), vv = v(i);
        for (std::size_t j = 0; j < c.n; ++j)
            os << c.id << ',' << format_number(c.xc[j]) << ',' << format_number(c.Hc[j] + hh[j]) << ','
               << format_number(c.Vc[j] + vv[j]) << ',' << format_number(hh[j]) << ',' << format_number(vv[j]) << '\n';
    }
}

LyapunovTrace run(NetworkSimulator& sim, double T, int sample_stride,
                  const std::function<void(const NetworkSimulator&)>& after_step) {
    if (sample_stride < 1) sample_stride = 1;
    LyapunovTrace trace;
    trace.dt = sim.dt();
    trace.samples.push_back(sim.sample());
    const long n = static_cast<long>(std::ceil(T / sim.dt() - 1e-9));
    for (long s = 1; s <= n; ++s) {
        sim.step();
        if (after_step) after_step(sim);
        if (s % sample_stride == 0 || s == n) trace.samples.push_back(sim.sample());
    }
    trace.steps = sim.steps();
    trace.max_junction_residual = sim.max_junction_residual();
    trace.max_mass_residual = sim.max_mass_residual();
    return trace;
}

}  // namespace svnet
