#include "doctest.h"

#include <cmath>

#include "svnet/certificate.hpp"
#include "svnet/error.hpp"
#include "svnet/gains.hpp"

using namespace svnet;

namespace {

ChannelSpec spec(int id, double L, double C, int cells = 40) {
    ChannelSpec s;
    s.id = id;
    s.length = L;
    s.friction = C;
    s.cells = cells;
    return s;
}

struct Star {
    NetworkTopology topo;
    std::vector<SteadyProfile> profiles;
};

Star star3(double C = 0.002) {
    Star s;
    s.topo = make_star(spec(1, 600, C), {spec(0, 500, C), spec(0, 500, C), spec(0, 400, C)}, {0.3, 0.3, 0.4});
    s.profiles = solve_network_steady(s.topo, 2.0, 3.0);
    return s;
}

/** Root 1 -> {2, 3}, 2 -> {4, 5}, 3 -> {6, 7}. */
Star tree() {
    Star s;
    const double C = 0.002;
    for (int id = 1; id <= 7; ++id) s.topo.channels.push_back(spec(id, id == 1 ? 500 : 300, C));
    s.topo.root_channel = 1;
    s.topo.junctions = {{1, {2, 3}, {0.5, 0.5}}, {2, {4, 5}, {0.4, 0.6}}, {3, {6, 7}, {0.5, 0.5}}};
    s.profiles = solve_network_steady(s.topo, 2.0, 3.0);
    return s;
}

std::map<int, double> gains_for(const NetworkTopology& topo, double k) {
    std::map<int, double> g;
    for (const auto& c : topo.channels)
        if (topo.is_terminal(c.id)) g[c.id] = k;
    return g;
}

}  // namespace

TEST_CASE("alpha selection zeroes the omega column") {
    auto s = star3();
    auto cert = certify_network(s.topo, s.profiles, gains_for(s.topo, 0.5));
    REQUIRE(cert.junctions.size() == 1);
    const auto& jm = cert.junctions[0];
    CHECK(jm.max_abs_omega <= 1e-12 * jm.omega_scale);
    CHECK(cert.weights[0].alpha == 1.0);
    for (std::size_t j = 1; j < 4; ++j)
        CHECK(cert.weights[j].W(0) == doctest::Approx(cert.weights[0].W(cert.weights[0].x.size() - 1)).epsilon(1e-14));
}

TEST_CASE("identical branches get equal alpha and equal theta") {
    auto s = star3();
    auto cert = certify_network(s.topo, s.profiles, gains_for(s.topo, 0.5));
    CHECK(cert.weights[1].alpha == doctest::Approx(cert.weights[2].alpha).epsilon(1e-14));
    const auto& M = cert.junctions[0].M_bar;
    CHECK(M[0][0] == doctest::Approx(M[1][1]).epsilon(1e-14));
    // eta_j(0) = 1 + eps on every branch, so W_j(0) = W_i(L) forces equal Z_j(0)
    CHECK(M[0][0] == doctest::Approx(M[2][2]).epsilon(1e-12));
}

TEST_CASE("star with admissible gains is certified") {
    auto s = star3();
    auto gains = gains_for(s.topo, 0.5);
    for (auto [id, k] : gains) CHECK(evaluate_gain(s.profiles[s.topo.index_of(id)], k).admissible);
    auto cert = certify_network(s.topo, s.profiles, gains);
    CHECK(cert.certified);
    CHECK(cert.reason.empty());
    CHECK(cert.epsilon > 0.0);
    CHECK(cert.F1 > 0.0);
    const auto& jm = cert.junctions[0];
    CHECK(jm.min_eigenvalue > 0.0);
    CHECK(jm.Z_in > 0.0);
    for (double z : jm.Z_out) CHECK(z < 0.0);
    CHECK(jm.M_bar[3][3] > 0.0);
    CHECK(jm.det_eigen > 0.0);
    CHECK(jm.det_transformed == doctest::Approx(jm.det_eigen).epsilon(1e-10));
    for (const auto& t : cert.terminals) CHECK(t.margin > 0.0);
    for (const auto& c : cert.channels) CHECK(c.interior.min_eigenvalue > 0.0);
}

TEST_CASE("transformed determinant matches the eigenvalue product") {
    auto s = tree();
    auto cert = certify_network(s.topo, s.profiles, gains_for(s.topo, 0.5));
    CHECK(cert.certified);
    REQUIRE(cert.junctions.size() == 3);
    for (const auto& jm : cert.junctions) {
        CHECK(jm.min_eigenvalue > 0.0);
        CHECK(jm.det_transformed == doctest::Approx(jm.det_eigen).epsilon(1e-10));
        CHECK(jm.max_abs_omega <= 1e-12 * jm.omega_scale);
    }
}

TEST_CASE("a gain at a forbidden-interval endpoint fails the terminal margin") {
    auto s = star3();
    auto gains = gains_for(s.topo, 0.5);
    const auto& prof = s.profiles[s.topo.index_of(3)];
    gains[3] = evaluate_gain(prof, 0.0).forbidden.a;
    CertifyOptions opt;
    opt.max_halvings = 4;
    auto cert = certify_network(s.topo, s.profiles, gains, opt);
    CHECK_FALSE(cert.certified);
    CHECK(cert.reason == "terminal_margin:3");
    CHECK(cert.halvings == 4);
    for (const auto& t : cert.terminals)
        if (t.channel == 3) CHECK(t.margin < 0.0);
}

TEST_CASE("epsilon halving stops at the resolution floor") {
    auto s = star3();
    auto gains = gains_for(s.topo, 0.5);
    gains[3] = evaluate_gain(s.profiles[s.topo.index_of(3)], 0.0).forbidden.b;
    CertifyOptions opt;
    opt.resolution = 1e-5;
    auto cert = certify_network(s.topo, s.profiles, gains, opt);
    CHECK_FALSE(cert.certified);
    const double floor = opt.resolution / 400.0;
    CHECK(cert.epsilon >= floor);
    CHECK(cert.epsilon < 2.0 * floor);
    CHECK(cert.epsilon == opt.epsilon * std::ldexp(1.0, -cert.halvings));
    CHECK(cert.reason == "terminal_margin:3");
}

TEST_CASE("alpha rescaling leaves Z~, W~ and the verdict unchanged") {
    auto s = tree();
    std::vector<CharCoeffs> cc;
    for (const auto& p : s.profiles) cc.push_back(coupling_coefficients(p));
    auto cert = certify_at(s.topo, s.profiles, cc, gains_for(s.topo, 0.5), 1e-3);
    for (double lambda : {1e-3, 7.0, 1e4}) {
        auto scaled = cert.weights;
        for (auto& w : scaled) {
            const auto Zt = w.Z_tilde, Wt = w.W_tilde;
            w.set_alpha(lambda * w.alpha);
            CHECK(w.Z_tilde == Zt);
            CHECK(w.W_tilde == Wt);
        }
        for (std::size_t j = 0; j < s.topo.junctions.size(); ++j) {
            const auto& junction = s.topo.junctions[j];
            const std::size_t i = s.topo.index_of(junction.incoming);
            std::vector<const WeightSet*> out;
            for (int id : junction.outgoing) out.push_back(&scaled[s.topo.index_of(id)]);
            auto jm = junction_matrix(scaled[i], out, s.profiles[i].HL(), 9.81);
            CHECK((jm.min_eigenvalue > 1e-12 * jm.norm) == cert.junctions[j].positive);
            CHECK(jm.min_eigenvalue == doctest::Approx(lambda * cert.junctions[j].min_eigenvalue).epsilon(1e-9));
        }
        for (std::size_t i = 0; i < scaled.size(); ++i) {
            auto ic = interior_check(scaled[i], cc[i]);
            CHECK(ic.min_relative == doctest::Approx(cert.channels[i].interior.min_relative).epsilon(1e-9));
        }
    }
}

TEST_CASE("interior matrix matches its definition with numerical derivatives") {
    auto s = star3();
    std::vector<CharCoeffs> cc;
    for (const auto& p : s.profiles) cc.push_back(coupling_coefficients(p));
    auto cert = certify_at(s.topo, s.profiles, cc, gains_for(s.topo, 0.5), 1e-3);
    for (std::size_t i = 0; i < cc.size(); ++i) {
        const auto& w = cert.weights[i];
        const double h = s.profiles[i].fine_step();
        for (std::size_t k = 1; k + 1 < w.x.size(); k += 17) {
            const double d1 = (w.f1[k + 1] * cc[i].lambda1[k + 1] - w.f1[k - 1] * cc[i].lambda1[k - 1]) / (2 * h);
            const double d2 = (w.f2[k + 1] * cc[i].lambda2[k + 1] - w.f2[k - 1] * cc[i].lambda2[k - 1]) / (2 * h);
            const auto N = interior_matrix(w, cc[i], k);
            const double n11 = -d1 + 2 * w.f1[k] * cc[i].gamma1[k];
            const double n22 = d2 + 2 * w.f2[k] * cc[i].delta2[k];
            CHECK(N[0][0] == doctest::Approx(n11).epsilon(1e-6));
            CHECK(N[1][1] == doctest::Approx(n22).epsilon(1e-6));
            CHECK(N[0][0] * N[1][1] - N[0][1] * N[0][1] > 0.0);
            CHECK(N[0][0] + N[1][1] > 0.0);
        }
    }
}

TEST_CASE("sign of Z at the inlet follows eta(0) against 1") {
    auto s = star3();
    for (std::size_t i = 0; i < s.profiles.size(); ++i) {
        auto cc = coupling_coefficients(s.profiles[i]);
        for (bool trunk : {true, false}) {
            auto w = build_weight_set(s.profiles[i], cc, 1e-4, trunk);
            CHECK((w.Z(0) < 0.0) == (w.eta[0] > 1.0));
            CHECK((w.eta[0] > 1.0) == !trunk);
        }
    }
}

TEST_CASE("root coefficient forms agree") {
    auto s = star3();
    auto cc = coupling_coefficients(s.profiles[0]);
    auto w = build_weight_set(s.profiles[0], cc, 1e-3, true);
    w.set_alpha(2.5);
    const double V = s.profiles[0].V0();
    const double l1 = cc.lambda1[0], l2 = cc.lambda2[0];
    const double direct = (l2 * l1 * l1 * w.f2[0] - l1 * l2 * l2 * w.f1[0]) / (V * V);
    CHECK(root_coefficient(w, cc, V) == doctest::Approx(direct).epsilon(1e-12));
    const double eps = w.eta[0] - l2 / l1;
    const double expanded = w.alpha * (l1 * l1 * eps * eps + 2 * eps * l1 * l2) / (V * V * w.eta[0]);
    CHECK(root_coefficient(w, cc, V) == doctest::Approx(expanded).epsilon(1e-9));
}

TEST_CASE("errors") {
    auto s = star3();
    auto gains = gains_for(s.topo, 0.5);
    gains.erase(2);
    CHECK_THROWS_AS(certify_network(s.topo, s.profiles, gains), Error);
    try {
        certify_network(s.topo, s.profiles, gains);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingGain);
        CHECK(e.channel() == 2);
    }
    gains = gains_for(s.topo, 0.5);
    gains[4] = std::sqrt(9.81 / s.profiles[3].HL());
    CHECK_THROWS_AS(certify_network(s.topo, s.profiles, gains), Error);
}
