#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "svnet/certificate.hpp"
#include "svnet/characteristics.hpp"
#include "svnet/decay.hpp"
#include "svnet/error.hpp"
#include "svnet/gains.hpp"
#include "svnet/simulator.hpp"
#include "svnet/steady_state.hpp"
#include "svnet/weights.hpp"

using namespace svnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

constexpr double kG = 9.81;
const double kExponents[] = {0.0, 1.0, 4.0 / 3.0, 2.0};

struct ChannelDraw {
    double H0, Q, C, p;
};

/** Subcritical inlet state with H0 >= 1.1 critical depth. */
ChannelDraw draw_channel(std::mt19937_64& rng, double p) {
    std::uniform_real_distribution<double> uH(0.6, 5.0), uQ(0.2, 3.0), uC(1e-4, 5e-3);
    for (;;) {
        ChannelDraw d{uH(rng), uQ(rng), uC(rng), p};
        if (d.H0 >= 1.1 * critical_depth(d.Q, kG)) return d;
    }
}

SteadyProfile build(const ChannelDraw& d, double fraction, int cells) {
    ChannelSpec s;
    s.friction = d.C;
    s.friction_exponent = d.p;
    s.cells = cells;
    s.length = 1.0;
    s.length = fraction * blowup_bound(d.H0, d.Q, s);
    return integrate_channel_steady(d.H0, d.Q, s);
}

double sup_rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double gap = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, std::abs(a[k] - b[k]) / std::abs(b[k]));
    return gap;
}

/** The random channel suite shared by criteria 1, 2, 3 and 9. */
std::vector<ChannelDraw> channel_suite() {
    std::mt19937_64 rng(20240601);
    std::vector<ChannelDraw> suite;
    for (int t = 0; t < 100; ++t) suite.push_back(draw_channel(rng, kExponents[t % 4]));
    return suite;
}

Outcome criterion1(const std::vector<ChannelDraw>& suite) {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& d : suite) {
        const auto prof = build(d, 0.8, 200);
        const auto cc = coupling_coefficients(prof);
        const auto phi = phi_profiles(cc, prof.fine_step());
        worst = std::max(worst, sup_rel_gap(eta_bar_closed(prof, cc, phi), eta_bar_ode_oracle(prof)));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-8 && seconds <= 10.0,
            fmt("%zu channels, max sup-norm relative gap %.3e (limit 1e-8), %.2f s (limit 10 s)", suite.size(), worst,
                seconds)};
}

Outcome criterion2(const std::vector<ChannelDraw>& suite) {
    double min_gap = INFINITY, worst_start = 0.0, worst_m0 = 0.0;
    for (const auto& d : suite) {
        const auto prof = build(d, 0.8, 200);
        const auto cc = coupling_coefficients(prof);
        const auto phi = phi_profiles(cc, prof.fine_step());
        const auto eta_bar = eta_bar_closed(prof, cc, phi);
        const auto m = m_profile(prof);
        for (std::size_t k = 1; k < eta_bar.size(); ++k) min_gap = std::min(min_gap, phi.phi[k] - eta_bar[k]);
        worst_start = std::max(worst_start, std::abs(eta_bar[0] - 1.0));
        const double m0 = cc.lambda1[0] / cc.lambda2[0];
        worst_m0 = std::max(worst_m0, std::abs(m[0] - m0) / m0);
    }
    return {min_gap > 0.0 && worst_start <= 1e-10 && worst_m0 <= 1e-10,
            fmt("min(phi - eta_bar) over (0,L] = %.3e, |eta_bar(0) - 1| <= %.1e, m(0) relative error %.1e",
                min_gap, worst_start, worst_m0)};
}

Outcome criterion3(const std::vector<ChannelDraw>& suite) {
    double worst = INFINITY;
    for (const auto& d : suite) {
        const auto prof = build(d, 0.99, 200);
        const auto cc = coupling_coefficients(prof);
        worst = std::min(worst, quadrature_check(prof, cc, phi_profiles(cc, prof.fine_step())).min_margin);
    }
    return {worst > 0.0, fmt("minimum quadrature margin up to 0.99 blowup_bound: %.3e", worst)};
}

Outcome criterion4() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int pairs = 0, skipped = 0, disagreements = 0;
    double worst_product = 0.0;
    while (pairs < 500) {
        const auto prof = build(draw_channel(rng, kExponents[(pairs + skipped) % 4]), 0.6, 50);
        const double s = std::sqrt(prof.g / prof.HL());
        const double k = s * u(rng);
        auto record = gain_record(prof, k);
        const auto& fi = record.forbidden;
        const double scale = std::max({std::abs(fi.a), std::abs(fi.b), 1.0});
        if (std::abs(k - fi.a) <= 1e-9 * scale || std::abs(k - fi.b) <= 1e-9 * scale) {
            ++skipped;
            continue;
        }
        const auto cc = coupling_coefficients(prof);
        is_admissible(record, eta_bar_ode_oracle(prof).back(), phi_profiles(cc, prof.fine_step()).phi.back());
        if (!record.verdicts_agree()) ++disagreements;
        const double target = prof.g / prof.HL();
        worst_product = std::max(worst_product, std::abs(fi.a * fi.b - target) / target);
        ++pairs;
    }

    int half_lines = 0;
    bool frictionless_ok = true;
    for (int t = 0; t < 20; ++t) {
        auto d = draw_channel(rng, kExponents[t % 4]);
        ChannelSpec spec;
        spec.length = 1000.0;
        spec.cells = 20;
        const auto prof = integrate_channel_steady(d.H0, d.Q, spec);
        const double s = std::sqrt(prof.g / prof.HL());
        for (double x : {-3.0, -0.5, -1e-3, 1e-3, 0.5, 3.0}) {
            const auto r = evaluate_gain(prof, s * x);
            const bool interval_ok = r.forbidden.half_line && r.forbidden.b == 0.0 && r.forbidden.contains(-1e300);
            frictionless_ok = frictionless_ok && interval_ok && r.admissible == (x > 0.0) && r.verdicts_agree();
        }
        ++half_lines;
    }
    return {disagreements == 0 && worst_product <= 1e-12 && frictionless_ok,
            fmt("%d pairs, %d disagreements, %d skipped near endpoints, max |ab - g/H|/(g/H) = %.1e, "
                "%d frictionless channels give (-inf, 0]: %s",
                pairs, disagreements, skipped, worst_product, half_lines, frictionless_ok ? "yes" : "no")};
}

/** Gain outside the forbidden interval by a relative margin, drawn on the scale sqrt(g/H(L)). */
double admissible_gain(std::mt19937_64& rng, const SteadyProfile& prof) {
    const double s = std::sqrt(prof.g / prof.HL());
    const auto fi = evaluate_gain(prof, 0.0).forbidden;
    const double a = fi.a / s, b = fi.b / s;
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::bernoulli_distribution left(0.5);
    for (;;) {
        const double x = left(rng) ? 1.05 * a - 0.02 - u(rng) : 0.95 * b + 0.02 + u(rng);
        if (std::abs(x - 1.0) >= 0.05) return s * x;
    }
}

ChannelSpec random_spec(std::mt19937_64& rng, int id) {
    std::uniform_real_distribution<double> uL(500.0, 5000.0), uC(1e-3, 5e-3);
    ChannelSpec s;
    s.id = id;
    s.length = uL(rng);
    s.friction = uC(rng);
    s.friction_exponent = 1.0;
    s.cells = 20;
    return s;
}

std::vector<double> random_splits(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.5, 1.5);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto& x : w) total += (x = u(rng));
    for (auto& x : w) x /= total;
    return w;
}

struct RandomNetwork {
    NetworkTopology topo;
    std::vector<SteadyProfile> profiles;
};

RandomNetwork random_network(std::mt19937_64& rng, bool tree) {
    std::uniform_real_distribution<double> uH(2.5, 5.0), uQ(0.5, 3.0);
    std::uniform_int_distribution<int> branches(2, 6), sub(2, 3);
    for (;;) {
        RandomNetwork net;
        auto& topo = net.topo;
        topo.channels.push_back(random_spec(rng, 1));
        int next = 2;
        const int n = tree ? sub(rng) : branches(rng);
        Junction root{1, {}, random_splits(rng, n)};
        for (int j = 0; j < n; ++j) {
            root.outgoing.push_back(next);
            topo.channels.push_back(random_spec(rng, next++));
        }
        topo.junctions.push_back(root);
        if (tree)
            for (int parent : std::vector<int>(root.outgoing)) {
                const int m = sub(rng);
                Junction jn{parent, {}, random_splits(rng, m)};
                for (int j = 0; j < m; ++j) {
                    jn.outgoing.push_back(next);
                    topo.channels.push_back(random_spec(rng, next++));
                }
                topo.junctions.push_back(jn);
            }
        try {
            net.profiles = solve_network_steady(topo, uQ(rng), uH(rng));
            return net;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SteadyStateBlowup) throw;
        }
    }
}

std::string failure_list(const NetworkCertificate& c) {
    std::string s;
    for (const auto& f : c.failures) s += (s.empty() ? "" : ",") + f;
    return s;
}

Outcome criterion5() {
    std::mt19937_64 rng(55);
    int stars = 0, trees = 0, certified = 0, endpoint_runs = 0, endpoint_failed = 0;
    double min_junction = INFINITY, min_F1 = INFINITY, min_terminal = INFINITY, min_interior = INFINITY;
    std::string first_problem;
    for (int t = 0; t < 70; ++t) {
        const bool tree = t >= 50;
        auto net = random_network(rng, tree);
        (tree ? trees : stars)++;
        std::map<int, double> gains;
        for (std::size_t i = 0; i < net.topo.channels.size(); ++i)
            if (net.topo.is_terminal(net.topo.channels[i].id))
                gains[net.topo.channels[i].id] = admissible_gain(rng, net.profiles[i]);
        const auto cert = certify_network(net.topo, net.profiles, gains);
        bool ok = cert.certified && cert.F1 > 0.0;
        for (const auto& j : cert.junctions) {
            ok = ok && j.min_eigenvalue > 0.0;
            min_junction = std::min(min_junction, j.min_eigenvalue / j.norm);
        }
        for (const auto& term : cert.terminals) {
            ok = ok && term.margin > 0.0;
            min_terminal = std::min(min_terminal, term.margin / term.scale);
        }
        for (const auto& ch : cert.channels) {
            ok = ok && ch.interior.positive;
            min_interior = std::min(min_interior, ch.interior.min_relative);
        }
        min_F1 = std::min(min_F1, cert.F1);
        if (ok)
            ++certified;
        else if (first_problem.empty())
            first_problem = fmt(" network %d: %s;", t, cert.reason.c_str());

        if (t % 5 == 0) {
            const int id = gains.begin()->first;
            const auto& prof = net.profiles[net.topo.index_of(id)];
            const auto fi = evaluate_gain(prof, 0.0).forbidden;
            for (double k : {fi.a, fi.b}) {
                auto bad = gains;
                bad[id] = k;
                const auto failed = certify_network(net.topo, net.profiles, bad);
                ++endpoint_runs;
                const std::string name = "terminal_margin:" + std::to_string(id);
                if (!failed.certified &&
                    std::find(failed.failures.begin(), failed.failures.end(), name) != failed.failures.end())
                    ++endpoint_failed;
                else if (first_problem.empty())
                    first_problem = fmt(" endpoint on network %d not rejected (%s);", t, failure_list(failed).c_str());
            }
        }
    }
    return {certified == stars + trees && endpoint_failed == endpoint_runs,
            fmt("%d/%d networks certified (%d stars, %d trees); min relative eigenvalue of M_bar %.2e, min F1 %.2e, "
                "min relative terminal margin %.2e, min relative N eigenvalue %.2e; endpoint gains rejected by "
                "terminal_margin %d/%d;%s",
                certified, stars + trees, stars, trees, min_junction, min_F1, min_terminal, min_interior,
                endpoint_failed, endpoint_runs, first_problem.c_str())};
}

/** 3-branch star used by criteria 6, 7, 8 and 10. */
cli::RunConfig star_config(int cells) {
    cli::RunConfig c;
    ChannelSpec trunk{1, 1000.0, 0.002, 1.0, kG, cells};
    std::vector<ChannelSpec> branches{{2, 800.0, 0.002, 1.0, kG, cells},
                                      {3, 600.0, 0.002, 1.0, kG, cells},
                                      {4, 700.0, 0.002, 1.0, kG, cells}};
    c.network = make_star(trunk, branches, {0.3, 0.3, 0.4});
    c.Q_root = 2.0;
    c.H_root = 3.0;
    c.gains = {{2, 0.5}, {3, 0.5}, {4, 0.5}};
    c.simulation.T = 2500.0;
    c.simulation.sample_stride = 10;
    c.simulation.perturbation.amplitude = 1e-3;
    return c;
}

Outcome criterion6() {
    const auto c = star_config(100);
    const auto profiles = solve_network_steady(c.network, c.Q_root, c.H_root);
    NetworkSimulator sim(c.network, profiles, c.gains, SimOptions{SimMode::Nonlinear, 0.9});
    sim.perturb(Perturbation{});
    double drift = 0.0;
    for (int n = 0; n < 10000; ++n) {
        sim.step();
        drift = std::max(drift, sim.max_abs_deviation());
    }
    return {drift <= 1e-10, fmt("max deviation over 10^4 nonlinear steps: %.3e (limit 1e-10)", drift)};
}

/** Longest root-to-terminal travel time at the slower characteristic speed. */
double transit_time(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles) {
    std::vector<double> arrive(topo.channels.size(), 0.0);
    double longest = 0.0;
    for (int id : traversal_order(topo)) {
        const std::size_t i = topo.index_of(id);
        const auto& p = profiles[i];
        double travel = 0.0;
        for (std::size_t k = 0; k + 1 < p.x.size(); ++k) {
            const double l2 = std::sqrt(p.g * p.H[k]) - p.V[k];
            travel += (p.x[k + 1] - p.x[k]) / l2;
        }
        const int parent = topo.parent_of(id);
        arrive[i] = travel + (parent ? arrive[topo.index_of(parent)] : 0.0);
        longest = std::max(longest, arrive[i]);
    }
    return longest;
}

struct DecayRun {
    LyapunovTrace trace;
    DecayFit fit;
    double worst_increase = 0.0;  ///< largest V(t_{n+1})/V(t_n) - 1 between samples
    double tolerance = 0.0;       ///< 10 dx / L
    bool certified = false;
    std::vector<double> dh, dq;   ///< final nonlinear state
};

DecayRun decay_run(int cells, SimMode mode, double amplitude, double T) {
    auto c = star_config(cells);
    const auto profiles = solve_network_steady(c.network, c.Q_root, c.H_root);
    const auto cert = certify_network(c.network, profiles, c.gains);
    DecayRun r;
    r.certified = cert.certified;
    NetworkSimulator sim(c.network, profiles, c.gains, SimOptions{mode, 0.9});
    sim.set_weights(cert.weights);
    sim.perturb(Perturbation{amplitude, {}});
    r.trace = run(sim, T, c.simulation.sample_stride);
    std::vector<double> t, V;
    for (const auto& s : r.trace.samples) {
        t.push_back(s.t);
        V.push_back(s.V);
    }
    r.fit = decay_fit(t, V, 0.0, t.back());
    for (std::size_t n = 1; n < V.size(); ++n) r.worst_increase = std::max(r.worst_increase, V[n] / V[n - 1] - 1.0);
    double tol = 0.0;
    for (const auto& ch : c.network.channels) tol = std::max(tol, 10.0 / ch.cells);
    r.tolerance = tol;
    for (std::size_t i = 0; i < sim.channel_count(); ++i) {
        r.dh.insert(r.dh.end(), sim.field_a(i).begin(), sim.field_a(i).end());
        r.dq.insert(r.dq.end(), sim.field_b(i).begin(), sim.field_b(i).end());
    }
    return r;
}

Outcome criterion7() {
    const auto c = star_config(50);
    const auto profiles = solve_network_steady(c.network, c.Q_root, c.H_root);
    const double transit = transit_time(c.network, profiles);
    const double T = std::max(c.simulation.T, 5.0 * transit);
    const auto coarse = decay_run(50, SimMode::Linear, 1e-3, T);
    const auto fine = decay_run(100, SimMode::Linear, 1e-3, T);
    const double change = std::abs(fine.fit.nu_hat - coarse.fit.nu_hat) / coarse.fit.nu_hat;
    const bool monotone = coarse.worst_increase <= coarse.tolerance && fine.worst_increase <= fine.tolerance &&
                          fine.worst_increase <= coarse.worst_increase;
    const bool pass = coarse.certified && fine.certified && monotone && coarse.fit.nu_hat > 0.0 &&
                      fine.fit.nu_hat > 0.0 && coarse.fit.r2 >= 0.95 && fine.fit.r2 >= 0.95 && change <= 0.3;
    return {pass, fmt("T = %.0f s (transit %.0f s); 50 cells: nu_hat %.4e R2 %.4f worst increase %.2e (tol %.2e); "
                      "100 cells: nu_hat %.4e R2 %.4f worst increase %.2e (tol %.2e); nu_hat change %.1f%%",
                      T, transit, coarse.fit.nu_hat, coarse.fit.r2, coarse.worst_increase, coarse.tolerance,
                      fine.fit.nu_hat, fine.fit.r2, fine.worst_increase, fine.tolerance, 100.0 * change)};
}

double max_abs_diff(const DecayRun& a, const DecayRun& b, double scale_b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.dh.size(); ++k)
        d = std::max({d, std::abs(a.dh[k] - scale_b * b.dh[k]), std::abs(a.dq[k] - scale_b * b.dq[k])});
    return d;
}

Outcome criterion8() {
    const double a = 1e-3, T = star_config(100).simulation.T;
    const auto linear = decay_run(100, SimMode::Linear, a, T);
    const auto nonlinear = decay_run(100, SimMode::Nonlinear, a, T);
    const auto& s = nonlinear.trace.samples;
    const double nu_eff = -std::log(s.back().V_ext / s.front().V_ext) / s.back().t;
    const double ratio = nu_eff / linear.fit.nu_hat;

    const double t_r = 500.0;
    const auto u1 = decay_run(100, SimMode::Nonlinear, a, t_r);
    const auto u2 = decay_run(100, SimMode::Nonlinear, a / 2, t_r);
    const auto u4 = decay_run(100, SimMode::Nonlinear, a / 4, t_r);
    const double D1 = max_abs_diff(u1, u2, 2.0), D2 = max_abs_diff(u2, u4, 2.0);
    const double remainder = D1 / D2;
    const bool pass = ratio >= 0.5 && ratio <= 1.5 && remainder >= 3.0 && remainder <= 5.0;
    return {pass, fmt("V_ext(T)/V_ext(0) = %.3e over T = %.0f s, nu_eff %.4e vs nu_hat %.4e (ratio %.3f, "
                      "allowed [0.5, 1.5]); remainder ratio |U(a)-2U(a/2)| / |U(a/2)-2U(a/4)| at t = %.0f s: %.3f "
                      "(allowed [3, 5])",
                      s.back().V_ext / s.front().V_ext, s.back().t, nu_eff, linear.fit.nu_hat, ratio, t_r,
                      remainder)};
}

Outcome criterion9(const std::vector<ChannelDraw>& suite) {
    double worst = 0.0;
    for (const auto& d : suite) worst = std::max(worst, coupling_coefficients(build(d, 0.8, 200), 1.0).form_gap);
    return {worst <= 1e-10, fmt("max relative gap between coefficient forms: %.3e (limit 1e-10)", worst)};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion10() {
    auto c = star_config(50);
    c.simulation.T = 800.0;
    c.simulation.snapshot_times = {0.0, 400.0};
    const auto base = fs::temp_directory_path() / "svnet_acceptance";
    fs::remove_all(base);
    std::ostringstream log;
    const int r1 = cli::cmd_simulate(c, base / "first", log);
    const int r2 = cli::cmd_simulate(c, base / "second", log);
    int files = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(base / "first")) {
        ++files;
        const auto other = base / "second" / entry.path().filename();
        if (fs::exists(other) && read_bytes(entry.path()) == read_bytes(other)) ++identical;
    }
    return {r1 == 0 && r2 == 0 && files >= 4 && identical == files,
            fmt("exit codes %d/%d, %d/%d output files byte-identical", r1, r2, identical, files)};
}

}  // namespace

int main() {
    const auto suite = channel_suite();
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"C1 closed-form eta_bar vs ODE oracle", [&] { return criterion1(suite); }},
        {"C2 phi exceeds eta_bar", [&] { return criterion2(suite); }},
        {"C3 quadrature margin", [&] { return criterion3(suite); }},
        {"C4 gain-condition equivalence", criterion4},
        {"C5 certificate positivity", criterion5},
        {"C6 well-balancedness", criterion6},
        {"C7 linear decay", criterion7},
        {"C8 nonlinear small-perturbation decay", criterion8},
        {"C9 dual-form coefficients", [&] { return criterion9(suite); }},
        {"C10 determinism", criterion10},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
