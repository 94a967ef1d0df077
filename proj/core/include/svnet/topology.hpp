#pragma once

#include <map>
#include <vector>

namespace svnet {

/** Physical and grid parameters of one rectangular channel of unit width. */
struct ChannelSpec {
    int id = 1;
    double length = 1000.0;          ///< m
    double friction = 0.0;           ///< C, dimensionless
    double friction_exponent = 1.0;  ///< p (1: Chezy, 4/3: Manning-Strickler)
    double gravity = 9.81;           ///< m/s^2
    int cells = 64;                  ///< finite-volume cells, at least 8
};

/** A multiple node: one incoming channel splitting into ordered outgoing channels. */
struct Junction {
    int incoming = 0;
    std::vector<int> outgoing;
    std::vector<double> split_fractions;  ///< share of incoming flux per outgoing channel
};

struct NetworkTopology {
    std::vector<ChannelSpec> channels;
    int root_channel = 1;
    std::vector<Junction> junctions;

    /** Position of channel `id` in `channels`; throws InvalidTopology if unknown. */
    std::size_t index_of(int id) const;
    const ChannelSpec& channel(int id) const;
    /** Junction fed by channel `id`, or nullptr when `id` is terminal. */
    const Junction* junction_at_end(int id) const;
    /** Parent channel id, or 0 for the root. Assumes a validated topology. */
    int parent_of(int id) const;
    bool is_terminal(int id) const { return junction_at_end(id) == nullptr; }
    double gravity() const;
};

struct ValidationReport {
    std::vector<int> internal;     ///< channels ending at a junction
    std::vector<int> terminal;     ///< channels ending at a simple node
    std::map<int, int> degree;     ///< incoming id -> 1 + number of outgoing channels
};

/** Checks channel parameters, the tree structure and split fractions. */
ValidationReport validate_topology(const NetworkTopology& topo);

/** Root-first breadth-first order in which each channel follows its parent. */
std::vector<int> traversal_order(const NetworkTopology& topo);

/** Convenience: trunk `1` feeding `branches` channels with the given parameters. */
NetworkTopology make_star(const ChannelSpec& trunk, const std::vector<ChannelSpec>& branches,
                          const std::vector<double>& split_fractions);

}  // namespace svnet
