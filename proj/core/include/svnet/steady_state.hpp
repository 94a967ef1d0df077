#pragma once

#include <iosfwd>
#include <vector>

#include "svnet/topology.hpp"

namespace svnet {

struct SteadyOptions {
    int refinement = 4;          ///< fine nodes per cell (even); centers at refinement/2
    double rtol = 1e-12;
    double atol_rel = 1e-14;     ///< absolute tolerance relative to H0
    double margin_tol = 1e-6;    ///< stop when gH - V^2 < margin_tol * g * H0
};

/**
 * Steady state of one channel sampled on a fine uniform grid.
 * Node `k` sits at x = k * length / (cells * refinement); cell faces are the
 * multiples of `refinement`, cell centers the odd multiples of refinement/2.
 */
struct SteadyProfile {
    int channel = 0;
    double Q = 0.0;
    double g = 9.81;
    double friction = 0.0;
    double friction_exponent = 1.0;
    double length = 0.0;
    int cells = 0;
    int refinement = 4;
    std::vector<double> x, H, V;
    double critical_depth = 0.0;
    double blowup_bound = 0.0;   ///< +inf when the steady ODE never blows up
    double depth_ratio = 1.0;    ///< H(L)/H(0)

    double dx() const { return length / cells; }
    double fine_step() const { return length / (static_cast<double>(cells) * refinement); }
    std::size_t face(std::size_t j) const { return j * static_cast<std::size_t>(refinement); }
    std::size_t center(std::size_t j) const { return face(j) + static_cast<std::size_t>(refinement / 2); }
    double H0() const { return H.front(); }
    double HL() const { return H.back(); }
    double V0() const { return V.front(); }
    double VL() const { return V.back(); }
};

/** (Q / sqrt(g))^(2/3). */
double critical_depth(double Q, double g);

/** dH/dx of the steady state, -gC V^2 / (H^(p-1) (gH - V^2)) with V = Q/H. */
double steady_rhs(double H, double Q, double C, double p, double g);

/** Last x (from 0) at which the subcritical margin stays above tolerance; +inf if none. */
double blowup_bound(double H0, double Q, const ChannelSpec& spec, const SteadyOptions& opt = {});

SteadyProfile integrate_channel_steady(double H0, double Q, const ChannelSpec& spec,
                                       const SteadyOptions& opt = {});

/** Profiles indexed like `topo.channels`. */
std::vector<SteadyProfile> solve_network_steady(const NetworkTopology& topo, double Q_root,
                                                double H_root, const SteadyOptions& opt = {});

/** Affine terminal law V = B(H) with B(H*(L)) = V*(L) and slope k. */
struct FeedbackLaw {
    double H_ref = 0.0;
    double V_ref = 0.0;
    double k = 0.0;
    double operator()(double H) const { return V_ref + k * (H - H_ref); }
    double derivative() const { return k; }
};

FeedbackLaw feedback_law(const SteadyProfile& profile, double k);

/** CSV with columns x, H_star, V_star at cell faces and centers. */
void write_profile_csv(std::ostream& os, const SteadyProfile& profile);

}  // namespace svnet
