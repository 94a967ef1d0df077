#include "svnet/certificate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "svnet/error.hpp"
#include "svnet/gains.hpp"

namespace svnet {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd e(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) e(i, j) = m[i][j];
    return e;
}

Eigen::VectorXd eigenvalues_of(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

}  // namespace

double min_eigenvalue(const Matrix& m) { return eigenvalues_of(m).minCoeff(); }

double max_abs_eigenvalue(const Matrix& m) { return eigenvalues_of(m).cwiseAbs().maxCoeff(); }

std::vector<double> alpha_select(const NetworkTopology& topo, const std::vector<WeightSet>& sets) {
    std::vector<double> alpha(topo.channels.size(), 1.0);
    for (int id : traversal_order(topo)) {
        const auto* junction = topo.junction_at_end(id);
        if (!junction) continue;
        const std::size_t i = topo.index_of(id);
        const double W_in = sets[i].W_tilde.back() * alpha[i];
        for (int out : junction->outgoing) {
            const std::size_t j = topo.index_of(out);
            const double W0 = sets[j].W_tilde.front();
            if (W0 == 0.0) throw Error(ErrorKind::ZeroW, "W~(0) vanishes", out, 0.0);
            alpha[j] = W_in / W0;
        }
    }
    return alpha;
}

JunctionMatrices junction_matrix(const WeightSet& in, const std::vector<const WeightSet*>& out, double H_L,
                                 double g) {
    JunctionMatrices jm;
    jm.incoming = in.channel;
    const std::size_t nb = out.size();
    const std::size_t n = nb + 1;
    const double ZL = in.Z(in.x.size() - 1);
    const double WL = in.W(in.x.size() - 1);
    const double s = std::sqrt(g * H_L) / H_L;
    jm.Z_in = ZL;
    jm.M.assign(n, std::vector<double>(n, 0.0));
    double sumZ0 = 0.0;
    double wmax = std::abs(WL);
    for (std::size_t a = 0; a < nb; ++a) {
        const double Z0 = out[a]->Z(0);
        const double W0 = out[a]->W(0);
        jm.outgoing.push_back(out[a]->channel);
        jm.Z_out.push_back(Z0);
        sumZ0 += Z0;
        wmax = std::max(wmax, std::abs(W0));
        for (std::size_t b = 0; b < nb; ++b) jm.M[a][b] = ZL;
        jm.M[a][a] = ZL - Z0;
        const double omega = s * (WL - W0);
        jm.M[a][nb] = jm.M[nb][a] = omega;
        jm.max_abs_omega = std::max(jm.max_abs_omega, std::abs(omega));
    }
    jm.M[nb][nb] = g / H_L * (ZL - sumZ0);
    jm.omega_scale = s * wmax;

    jm.M_bar = jm.M;
    for (std::size_t a = 0; a < nb; ++a) jm.M_bar[a][nb] = jm.M_bar[nb][a] = 0.0;
    const auto ev = eigenvalues_of(jm.M_bar);
    jm.min_eigenvalue = ev.minCoeff();
    jm.norm = ev.cwiseAbs().maxCoeff();

    Matrix block(nb, std::vector<double>(nb));
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = 0; b < nb; ++b) block[a][b] = jm.M_bar[a][b];
    jm.det_eigen = eigenvalues_of(block).prod();
    double theta2 = ZL - jm.Z_out[0];
    double prod = 1.0;
    for (std::size_t l = 1; l < nb; ++l) {
        theta2 += jm.Z_out[0] * ZL / jm.Z_out[l];
        prod *= -jm.Z_out[l];
    }
    jm.det_transformed = theta2 * prod;
    return jm;
}

Matrix interior_matrix(const WeightSet& w, const CharCoeffs& cc, std::size_t k) {
    const double eta = w.eta[k];
    const double p1 = w.phi.phi1[k], p2 = w.phi.phi2[k];
    const double n11 = w.alpha * p1 * p1 * w.eta_prime[k] / (eta * eta);
    const double n22 = w.alpha * p2 * p2 * w.eta_prime[k];
    const double n12 = w.f1[k] * cc.delta1[k] + w.f2[k] * cc.gamma2[k];
    return {{n11, n12}, {n12, n22}};
}

InteriorCheck interior_check(const WeightSet& w, const CharCoeffs& cc) {
    InteriorCheck ic;
    ic.min_eigenvalue = std::numeric_limits<double>::infinity();
    ic.min_relative = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.x.size(); ++k) {
        const auto N = interior_matrix(w, cc, k);
        const double a = N[0][0], b = N[0][1], d = N[1][1];
        const double mean = 0.5 * (a + d);
        const double rad = std::hypot(0.5 * (a - d), b);
        const double lo = mean - rad;
        const double norm = std::abs(mean) + rad;
        const double rel = norm > 0.0 ? lo / norm : 0.0;
        if (rel < ic.min_relative) {
            ic.min_relative = rel;
            ic.min_eigenvalue = lo;
            ic.x_at_min = w.x[k];
        }
    }
    return ic;
}

double root_coefficient(const WeightSet& w, const CharCoeffs& cc, double V0) {
    if (V0 == 0.0) return -w.Z(0);
    const double l1 = cc.lambda1[0], l2 = cc.lambda2[0], eta = w.eta[0];
    return w.alpha * (l1 * l1 * eta * eta - l2 * l2) / (V0 * V0 * eta);
}

TerminalCheck terminal_check(const WeightSet& w, const CharCoeffs& cc, double k, double H_L, double g) {
    TerminalCheck t;
    t.channel = w.channel;
    t.k = k;
    try {
        t.c = reflection_coefficient(k, H_L, g);
    } catch (const Error&) {
        throw Error(ErrorKind::NotAdmissibleInput, "terminal gain is the reflection pole", w.channel, w.x.back());
    }
    const std::size_t e = w.x.size() - 1;
    const double a = w.f1[e] * cc.lambda1[e] * t.c * t.c;
    const double b = w.f2[e] * cc.lambda2[e];
    t.margin = a - b;
    t.scale = a + b;
    return t;
}

NetworkCertificate certify_at(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                              const std::vector<CharCoeffs>& coeffs, const std::map<int, double>& gains,
                              double eps, double rel_tol) {
    const auto report = validate_topology(topo);
    for (int id : report.terminal)
        if (!gains.count(id)) throw Error(ErrorKind::MissingGain, "no gain for terminal channel", id);

    NetworkCertificate cert;
    cert.epsilon = eps;
    const std::size_t n = topo.channels.size();
    cert.weights.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool trunk = topo.channels[i].id == topo.root_channel;
        cert.weights.push_back(build_weight_set(profiles[i], coeffs[i], eps, trunk));
    }
    const auto alpha = alpha_select(topo, cert.weights);
    for (std::size_t i = 0; i < n; ++i) cert.weights[i].set_alpha(alpha[i]);

    auto fail = [&](const std::string& what) { cert.failures.push_back(what); };
    const double g = topo.gravity();

    for (std::size_t i = 0; i < n; ++i) {
        const auto& w = cert.weights[i];
        ChannelCheck cc;
        cc.channel = w.channel;
        cc.is_trunk = w.is_trunk;
        cc.alpha = w.alpha;
        cc.Z0 = w.Z(0);
        cc.ZL = w.Z(w.x.size() - 1);
        cc.interior = interior_check(w, coeffs[i]);
        cc.interior.positive = cc.interior.min_relative > rel_tol;
        if (!cc.interior.positive) fail("interior_N:" + std::to_string(w.channel));
        if (!topo.is_terminal(w.channel) && !(cc.ZL > rel_tol * w.W(w.x.size() - 1)))
            fail("junction_Z_end:" + std::to_string(w.channel));
        if (!w.is_trunk && !(cc.Z0 < -rel_tol * w.W(0))) fail("branch_Z_start:" + std::to_string(w.channel));
        cert.channels.push_back(cc);
    }

    for (const auto& junction : topo.junctions) {
        const std::size_t i = topo.index_of(junction.incoming);
        std::vector<const WeightSet*> out;
        for (int id : junction.outgoing) out.push_back(&cert.weights[topo.index_of(id)]);
        auto jm = junction_matrix(cert.weights[i], out, profiles[i].HL(), g);
        jm.positive = jm.min_eigenvalue > rel_tol * jm.norm;
        if (!jm.positive) fail("junction_matrix:" + std::to_string(junction.incoming));
        cert.junctions.push_back(std::move(jm));
    }

    const std::size_t r = topo.index_of(topo.root_channel);
    cert.F1 = root_coefficient(cert.weights[r], coeffs[r], profiles[r].V0());
    const double root_scale = cert.weights[r].W(0) / std::max(profiles[r].V0() * profiles[r].V0(), 1e-300) *
                              coeffs[r].lambda1[0];
    cert.root_positive = cert.F1 > rel_tol * (profiles[r].V0() == 0.0 ? cert.weights[r].W(0) : root_scale);
    if (!cert.root_positive) fail("root_F1");

    for (int id : report.terminal) {
        const std::size_t i = topo.index_of(id);
        auto t = terminal_check(cert.weights[i], coeffs[i], gains.at(id), profiles[i].HL(), g);
        t.positive = t.margin > rel_tol * t.scale;
        if (!t.positive) fail("terminal_margin:" + std::to_string(id));
        cert.terminals.push_back(t);
    }

    cert.certified = cert.failures.empty();
    if (!cert.certified) cert.reason = cert.failures.front();
    return cert;
}

NetworkCertificate certify_network(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                                   const std::map<int, double>& gains, const CertifyOptions& opt) {
    const auto report = validate_topology(topo);
    for (int id : report.terminal)
        if (!gains.count(id)) throw Error(ErrorKind::MissingGain, "no gain for terminal channel", id);
    if (profiles.size() != topo.channels.size())
        throw Error(ErrorKind::InvalidTopology, "one steady profile per channel is required");
    std::vector<CharCoeffs> coeffs;
    coeffs.reserve(profiles.size());
    for (const auto& p : profiles) coeffs.push_back(coupling_coefficients(p));

    double shortest = INFINITY;
    for (const auto& c : topo.channels) shortest = std::min(shortest, c.length);
    const double eps_floor = opt.resolution / shortest;

    double eps = opt.epsilon;
    NetworkCertificate last;
    bool have_last = false;
    int h = 0;
    for (; h <= opt.max_halvings && (h == 0 || eps >= eps_floor); ++h, eps *= 0.5) {
        try {
            auto cert = certify_at(topo, profiles, coeffs, gains, eps, opt.rel_tol);
            cert.halvings = h;
            if (cert.certified) return cert;
            last = std::move(cert);
            have_last = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::EpsilonTooLarge) throw;
        }
    }
    if (!have_last) {
        last.epsilon = eps * 2.0;
        last.halvings = h - 1;
        last.reason = "epsilon_existence";
        last.failures = {last.reason};
    }
    return last;
}

}  // namespace svnet
