#pragma once

#include <map>
#include <string>
#include <vector>

#include "svnet/characteristics.hpp"
#include "svnet/steady_state.hpp"
#include "svnet/topology.hpp"
#include "svnet/weights.hpp"

namespace svnet {

/** Dense symmetric matrix stored row by row. */
using Matrix = std::vector<std::vector<double>>;

double min_eigenvalue(const Matrix& m);
double max_abs_eigenvalue(const Matrix& m);

/**
 * alpha = 1 on the root, alpha_j = W~_i(L_i) alpha_i / W~_j(0) on every
 * outgoing channel j of a junction fed by i. Result is indexed like
 * topo.channels and `sets`. Throws ZeroW.
 */
std::vector<double> alpha_select(const NetworkTopology& topo, const std::vector<WeightSet>& sets);

struct JunctionMatrices {
    int incoming = 0;
    std::vector<int> outgoing;
    Matrix M;                        ///< with the current alpha
    Matrix M_bar;                    ///< M with the omega column removed
    double Z_in = 0.0;               ///< Z_i(L_i)
    std::vector<double> Z_out;       ///< Z_j(0)
    double max_abs_omega = 0.0;
    double omega_scale = 0.0;        ///< sqrt(g H)/H max(|W_i(L)|, |W_j(0)|)
    double min_eigenvalue = 0.0;     ///< of M_bar
    double norm = 0.0;               ///< spectral norm of M_bar
    double det_eigen = 0.0;          ///< product of the eigenvalues of the theta block
    double det_transformed = 0.0;    ///< theta~_2 times prod_{l>=3}(-Z_l(0))
    bool positive = false;
};

/**
 * Junction matrix with theta_j = Z_i(L) - Z_j(0), off-diagonal Z_i(L),
 * omega_j = sqrt(gH)(W_i(L) - W_j(0))/H and zeta = (g/H)(Z_i(L) - sum Z_j(0)).
 */
JunctionMatrices junction_matrix(const WeightSet& in, const std::vector<const WeightSet*>& out, double H_L,
                                 double g);

/** Smallest eigenvalue of N(x) over the grid and where it occurs. */
struct InteriorCheck {
    double min_eigenvalue = 0.0;
    double min_relative = 0.0;   ///< min over the grid of eigenvalue / norm
    double x_at_min = 0.0;
    bool positive = false;
};

/** N(x) entries at grid node k, using eta' = |G + I eta^2| + eps. */
Matrix interior_matrix(const WeightSet& w, const CharCoeffs& cc, std::size_t k);

InteriorCheck interior_check(const WeightSet& w, const CharCoeffs& cc);

/**
 * Root coefficient alpha (lambda1^2 eta^2 - lambda2^2)/(V^2 eta) at x = 0.
 * With V*(0) = 0 the root condition reads y1 = -y2 and the coefficient is -Z(0).
 */
double root_coefficient(const WeightSet& w, const CharCoeffs& cc, double V0);

struct TerminalCheck {
    int channel = 0;
    double k = 0.0;
    double c = 0.0;
    double margin = 0.0;   ///< f1 lambda1 c^2 - f2 lambda2 at L
    double scale = 0.0;
    bool positive = false;
};

TerminalCheck terminal_check(const WeightSet& w, const CharCoeffs& cc, double k, double H_L, double g);

struct CertifyOptions {
    double epsilon = 1e-3;       ///< first value tried, 1/m
    int max_halvings = 40;
    double resolution = 1e-8;    ///< smallest eps * (shortest channel length) tried
    double rel_tol = 1e-12;      ///< positivity threshold relative to the scale of each quantity
};

struct ChannelCheck {
    int channel = 0;
    bool is_trunk = false;
    double alpha = 1.0;
    double Z0 = 0.0, ZL = 0.0;
    InteriorCheck interior;
};

struct NetworkCertificate {
    bool certified = false;
    std::string reason;                 ///< first failing check, empty when certified
    std::vector<std::string> failures;  ///< every failing check at the final epsilon
    double epsilon = 0.0;
    int halvings = 0;
    double F1 = 0.0;
    bool root_positive = false;
    std::vector<JunctionMatrices> junctions;
    std::vector<TerminalCheck> terminals;
    std::vector<ChannelCheck> channels;
    std::vector<WeightSet> weights;     ///< indexed like topo.channels, alpha applied
};

/**
 * Runs every check at fixed epsilon. Throws EpsilonTooLarge when some eta
 * blows up and MissingGain when a terminal has no gain.
 */
NetworkCertificate certify_at(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                              const std::vector<CharCoeffs>& coeffs, const std::map<int, double>& gains,
                              double eps, double rel_tol = 1e-12);

/**
 * certify_at with epsilon halved on blow-up or on any failed check, down to
 * resolution / (shortest channel length) or max_halvings halvings.
 */
NetworkCertificate certify_network(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                                   const std::map<int, double>& gains, const CertifyOptions& opt = {});

}  // namespace svnet
