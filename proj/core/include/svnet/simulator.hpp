#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include "svnet/characteristics.hpp"
#include "svnet/steady_state.hpp"
#include "svnet/topology.hpp"
#include "svnet/weights.hpp"

namespace svnet {

enum class SimMode { Linear, Nonlinear };

/** Smooth bump in (h, v) on one channel; positions are fractions of the channel length. */
struct ChannelBump {
    int channel = 0;
    double center = 0.5;
    double width = 0.15;
    double weight_h = 1.0;   ///< h = amplitude * weight_h * H* * bump
    double weight_v = 0.5;   ///< v = amplitude * weight_v * sqrt(g H*) * bump
};

/** Relative amplitude and per-channel bumps; no bumps means the default bump on every channel. */
struct Perturbation {
    double amplitude = 0.0;
    std::vector<ChannelBump> bumps;
};

/** Gaussian bump tapered to zero within two cells of both ends. */
double tapered_bump(double x, double length, double dx, const ChannelBump& b);

struct SimOptions {
    SimMode mode = SimMode::Linear;
    double cfl = 0.9;
};

/** Values on the nodes 0, cell centers, L of one channel. */
struct NodeFields {
    std::vector<double> x, h, v, y1, y2;
};

struct TimeDerivatives {
    std::vector<double> y1_t, y2_t, y1_tt, y2_tt;
};

struct TraceSample {
    double t = 0.0;
    double V = 0.0;
    double V_ext = 0.0;
    double l2 = 0.0;
    double B = 0.0;
    std::vector<double> channel_l2;
};

struct LyapunovTrace {
    std::vector<TraceSample> samples;
    double dt = 0.0;
    long steps = 0;
    double max_junction_residual = 0.0;
    double max_mass_residual = 0.0;
};

/**
 * Explicit two-stage Runge-Kutta, first-order upwind finite volumes on the
 * deviation from the steady state, so the steady state is an exact fixed
 * point. Linear mode evolves the Riemann variables (y1, y2); nonlinear mode
 * evolves depth and discharge deviations (dh, dq).
 */
class NetworkSimulator {
public:
    NetworkSimulator(const NetworkTopology& topo, const std::vector<SteadyProfile>& profiles,
                     const std::map<int, double>& gains, const SimOptions& opt = {});

    void perturb(const Perturbation& p);
    /** Weights indexed like the channels; without them f1 = f2 = 1. */
    void set_weights(const std::vector<WeightSet>& weights);

    void step();
    void advance(long n);

    double time() const { return t_; }
    double dt() const { return dt_; }
    long steps() const { return steps_; }
    SimMode mode() const { return opt_.mode; }
    std::size_t channel_count() const { return chans_.size(); }
    int channel_id(std::size_t i) const { return chans_[i].id; }

    /** Cell-center deviations. */
    std::vector<double> h(std::size_t i) const;
    std::vector<double> v(std::size_t i) const;
    std::vector<double> cell_centers(std::size_t i) const;
    /** Evolved fields: (y1, y2) in linear mode, (dh, dq) in nonlinear mode. */
    const std::vector<double>& field_a(std::size_t i) const { return a_[i]; }
    const std::vector<double>& field_b(std::size_t i) const { return b_[i]; }

    /** Nodal values with boundary nodes from the face solves of the current state. */
    NodeFields node_fields(std::size_t i) const;
    /** d/dt and d2/dt2 of (y1, y2) at the nodes from the PDE with finite differences in x. */
    TimeDerivatives time_derivatives(std::size_t i) const;

    TraceSample sample() const;
    double max_abs_deviation() const;
    double max_junction_residual() const { return max_junction_residual_; }
    double max_mass_residual() const { return max_mass_residual_; }
    /** Integral of the depth deviation over the network, midpoint rule. */
    double mass_deviation() const;
    /** Discharge deviation leaving through the terminal faces minus that entering at the root. */
    double net_outflow() const;

    void write_snapshot(std::ostream& os) const;

private:
    struct Face {
        double a = 0.0, b = 0.0;  ///< (y1, y2) or (dh, dq)
    };
    struct Channel {
        int id = 0;
        SteadyProfile prof;
        std::size_t n = 0;
        double dx = 0.0, C = 0.0, p = 1.0;
        std::vector<double> xc, Hc, Vc, l1, l2, g1, d1, g2, d2;  ///< cell centers
        std::vector<double> Hf, Vf;                             ///< faces
        std::array<std::vector<double>, 6> node_coeffs;         ///< lambda1, lambda2, gamma1, delta1, gamma2, delta2 on the nodes
        std::vector<std::array<double, 4>> absA;                 ///< |A*| at interior faces
        int junction_in = -1;    ///< junction fed by this channel, or -1 if terminal
        int junction_out = -1;   ///< junction feeding this channel, or -1 for the root
        double k = 0.0;
    };
    struct JunctionLink {
        std::size_t in = 0;
        std::vector<std::size_t> out;
    };
    using Fields = std::vector<std::vector<double>>;

    void solve_faces(const Fields& a, const Fields& b, std::vector<Face>& f0, std::vector<Face>& fL) const;
    void rates(const Fields& a, const Fields& b, Fields& ra, Fields& rb, double& outflow) const;
    void check_state(const Fields& a, const Fields& b) const;
    double face_dh_root(const Channel& c, double Y2) const;
    double face_dh_terminal(const Channel& c, double Y1) const;
    double junction_residual(const Fields& a, const Fields& b) const;

    double g_ = 9.81;
    SimOptions opt_;
    std::vector<Channel> chans_;
    std::vector<JunctionLink> links_;
    std::size_t root_ = 0;
    Fields a_, b_;
    std::vector<std::vector<double>> f1_, f2_;  ///< weights on the nodes
    double t_ = 0.0, dt_ = 0.0;
    long steps_ = 0;
    double max_junction_residual_ = 0.0;
    double max_mass_residual_ = 0.0;
};

/** Samples at t = 0, every `sample_stride` steps and at the final step; the final time is the first step time >= T. */
LyapunovTrace run(NetworkSimulator& sim, double T, int sample_stride,
                  const std::function<void(const NetworkSimulator&)>& after_step = {});

}  // namespace svnet
