#include "svnet/steady_state.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "svnet/error.hpp"
#include "svnet/ode.hpp"
#include "svnet/report.hpp"

namespace svnet {

double critical_depth(double Q, double g) {
    if (Q < 0.0) throw Error(ErrorKind::NegativeFlux, "flux must be non-negative");
    return std::cbrt(Q * Q / g);
}

double steady_rhs(double H, double Q, double C, double p, double g) {
    const double V = Q / H;
    const double margin = g * H - V * V;
    if (!(H > 0.0) || !(margin > 0.0))
        throw Error(ErrorKind::SupercriticalState, "gH - V^2 = " + std::to_string(margin));
    if (C == 0.0 || Q == 0.0) return 0.0;
    return -g * C * V * V / (std::pow(H, p - 1.0) * margin);
}

namespace {

struct SteadyRhs {
    double Q, C, p, g;
    bool operator()(double, const OdeState<1>& y, OdeState<1>& dy) const {
        const double H = y[0];
        const double V = Q / H;
        const double margin = g * H - V * V;
        if (!(H > 0.0) || !(margin > 0.0)) return false;
        dy[0] = -g * C * V * V / (std::pow(H, p - 1.0) * margin);
        return true;
    }
};

OdeOptions ode_options(const SteadyOptions& opt, double H0) {
    OdeOptions o;
    o.rtol = opt.rtol;
    o.atol = opt.atol_rel * H0;
    return o;
}

void check_start(double H0, double Q, const ChannelSpec& spec, const SteadyOptions& opt) {
    if (Q < 0.0) throw Error(ErrorKind::NegativeFlux, "channel " + std::to_string(spec.id), spec.id);
    const double g = spec.gravity;
    const double V0 = Q / H0;
    if (!(H0 > 0.0) || !(g * H0 - V0 * V0 > opt.margin_tol * g * H0))
        throw Error(ErrorKind::SupercriticalStart,
                    "channel " + std::to_string(spec.id) + ": inlet depth " + std::to_string(H0) +
                    " not above critical depth " + std::to_string(critical_depth(Q, g)), spec.id);
}

/** Continues from (x, H) until the margin test fails; returns the last certified x. */
double continue_to_blowup(double x, double H, double H0, double Q, const ChannelSpec& spec,
                          const SteadyOptions& opt) {
    const double g = spec.gravity;
    const double floor = opt.margin_tol * g * H0;
    SteadyRhs rhs{Q, spec.friction, spec.friction_exponent, g};
    auto certified = [&](double, const OdeState<1>& y) {
        const double V = Q / y[0];
        return g * y[0] - V * V >= floor;
    };
    const double Hc = critical_depth(Q, g);
    // Rough distance estimate to the singular point, used only as an integration target.
    auto reach = [&](double Hs) {
        const double slope = std::abs(steady_rhs(Hs, Q, spec.friction, spec.friction_exponent, g));
        return 10.0 * (Hs - Hc) / slope + 1.0;
    };
    OdeState<1> y{H};
    double target = x + reach(H);
    double h = (target - x) * 1e-3;
    for (int round = 0; round < 400; ++round) {
        auto run = dopri5<1>(rhs, certified, x, y, target, ode_options(opt, H0), h);
        x = run.x;
        y = run.y;
        if (run.status == OdeStatus::Completed) {
            target = x + reach(y[0]);
            h = run.next_step;
            continue;
        }
        h = 0.1 * (run.steps > 0 ? run.next_step : h);
        if (h < 1e-14 * std::max(1.0, x)) break;
    }
    // Safety factor covering accumulated integration error.
    return x * (1.0 - 1e-8);
}

}  // namespace

double blowup_bound(double H0, double Q, const ChannelSpec& spec, const SteadyOptions& opt) {
    check_start(H0, Q, spec, opt);
    if (spec.friction == 0.0 || Q == 0.0) return std::numeric_limits<double>::infinity();
    return continue_to_blowup(0.0, H0, H0, Q, spec, opt);
}

SteadyProfile integrate_channel_steady(double H0, double Q, const ChannelSpec& spec,
                                       const SteadyOptions& opt) {
    check_start(H0, Q, spec, opt);
    if (opt.refinement < 2 || opt.refinement % 2 != 0)
        throw Error(ErrorKind::InvalidChannel, "refinement must be even", spec.id);
    const double g = spec.gravity;
    SteadyProfile prof;
    prof.channel = spec.id;
    prof.Q = Q;
    prof.g = g;
    prof.friction = spec.friction;
    prof.friction_exponent = spec.friction_exponent;
    prof.length = spec.length;
    prof.cells = spec.cells;
    prof.refinement = opt.refinement;
    prof.critical_depth = critical_depth(Q, g);

    const std::size_t n = static_cast<std::size_t>(spec.cells) * opt.refinement + 1;
    const double hx = prof.fine_step();
    prof.x.resize(n);
    prof.H.resize(n);
    prof.V.resize(n);
    for (std::size_t k = 0; k < n; ++k) prof.x[k] = (k + 1 == n) ? spec.length : hx * static_cast<double>(k);

    if (spec.friction == 0.0 || Q == 0.0) {
        for (std::size_t k = 0; k < n; ++k) {
            prof.H[k] = H0;
            prof.V[k] = Q / H0;
        }
        prof.blowup_bound = std::numeric_limits<double>::infinity();
        prof.depth_ratio = 1.0;
        return prof;
    }

    const double floor = opt.margin_tol * g * H0;
    SteadyRhs rhs{Q, spec.friction, spec.friction_exponent, g};
    auto certified = [&](double, const OdeState<1>& y) {
        const double V = Q / y[0];
        return g * y[0] - V * V >= floor;
    };
    OdeState<1> y{H0};
    prof.H[0] = H0;
    prof.V[0] = Q / H0;
    double h = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        auto run = dopri5<1>(rhs, certified, prof.x[k - 1], y, prof.x[k], ode_options(opt, H0), h);
        if (run.status != OdeStatus::Completed) {
            const double bound = continue_to_blowup(run.x, run.y[0], H0, Q, spec, opt);
            throw Error(ErrorKind::SteadyStateBlowup,
                        "channel " + std::to_string(spec.id) + ": subcritical steady state ends near x = " +
                        std::to_string(bound) + " m, before L = " + std::to_string(spec.length) + " m",
                        spec.id, bound);
        }
        y = run.y;
        if (run.next_step > 0.0) h = run.next_step;
        prof.H[k] = y[0];
        prof.V[k] = Q / y[0];
    }
    prof.depth_ratio = prof.H.back() / H0;
    prof.blowup_bound = continue_to_blowup(spec.length, prof.H.back(), H0, Q, spec, opt);
    return prof;
}

std::vector<SteadyProfile> solve_network_steady(const NetworkTopology& topo, double Q_root,
                                                double H_root, const SteadyOptions& opt) {
    const auto order = traversal_order(topo);
    std::vector<SteadyProfile> profiles(topo.channels.size());
    std::vector<double> inflow(topo.channels.size(), 0.0), inlet(topo.channels.size(), 0.0);
    inflow[topo.index_of(topo.root_channel)] = Q_root;
    inlet[topo.index_of(topo.root_channel)] = H_root;
    for (int id : order) {
        const std::size_t i = topo.index_of(id);
        profiles[i] = integrate_channel_steady(inlet[i], inflow[i], topo.channels[i], opt);
        if (const Junction* j = topo.junction_at_end(id)) {
            double assigned = 0.0;
            for (std::size_t l = 0; l < j->outgoing.size(); ++l) {
                const std::size_t o = topo.index_of(j->outgoing[l]);
                const bool last = l + 1 == j->outgoing.size();
                inflow[o] = last ? inflow[i] - assigned : j->split_fractions[l] * inflow[i];
                assigned += inflow[o];
                inlet[o] = profiles[i].HL();
            }
        }
    }
    return profiles;
}

FeedbackLaw feedback_law(const SteadyProfile& profile, double k) {
    return FeedbackLaw{profile.HL(), profile.VL(), k};
}

void write_profile_csv(std::ostream& os, const SteadyProfile& profile) {
    os << "x,H_star,V_star\n";
    const std::size_t stride = static_cast<std::size_t>(profile.refinement / 2);
    for (std::size_t k = 0; k < profile.x.size(); k += stride)
        os << format_number(profile.x[k]) << ',' << format_number(profile.H[k]) << ','
           << format_number(profile.V[k]) << '\n';
}

}  // namespace svnet
