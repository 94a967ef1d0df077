#include "svnet/topology.hpp"

#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "svnet/error.hpp"

namespace svnet {

std::size_t NetworkTopology::index_of(int id) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].id == id) return i;
    throw Error(ErrorKind::InvalidTopology, "unknown channel " + std::to_string(id), id);
}

const ChannelSpec& NetworkTopology::channel(int id) const { return channels[index_of(id)]; }

const Junction* NetworkTopology::junction_at_end(int id) const {
    for (const auto& j : junctions)
        if (j.incoming == id) return &j;
    return nullptr;
}

int NetworkTopology::parent_of(int id) const {
    for (const auto& j : junctions)
        for (int o : j.outgoing)
            if (o == id) return j.incoming;
    return 0;
}

double NetworkTopology::gravity() const {
    return channels.empty() ? 9.81 : channels.front().gravity;
}

namespace {

void check_channel(const ChannelSpec& c) {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::InvalidChannel, "channel " + std::to_string(c.id) + ": " + what, c.id);
    };
    if (!(c.length > 0.0) || !std::isfinite(c.length)) fail("length must be positive");
    if (!(c.friction >= 0.0) || !std::isfinite(c.friction)) fail("friction must be non-negative");
    if (!(c.friction_exponent >= 0.0)) fail("friction exponent must be non-negative");
    if (!(c.gravity > 0.0)) fail("gravity must be positive");
    if (c.cells < 8) fail("at least 8 cells required");
}

}  // namespace

ValidationReport validate_topology(const NetworkTopology& topo) {
    if (topo.channels.empty()) throw Error(ErrorKind::InvalidTopology, "no channels");
    std::set<int> ids;
    for (const auto& c : topo.channels) {
        check_channel(c);
        if (!ids.insert(c.id).second)
            throw Error(ErrorKind::InvalidTopology, "duplicate channel id " + std::to_string(c.id), c.id);
        if (c.gravity != topo.channels.front().gravity)
            throw Error(ErrorKind::InvalidTopology, "all channels must share the same gravity", c.id);
    }
    if (!ids.count(topo.root_channel))
        throw Error(ErrorKind::InvalidTopology, "root channel " + std::to_string(topo.root_channel) + " not found");

    std::map<int, int> parent;
    std::set<int> incoming_seen;
    for (const auto& j : topo.junctions) {
        if (!ids.count(j.incoming))
            throw Error(ErrorKind::InvalidTopology, "junction refers to unknown channel " + std::to_string(j.incoming), j.incoming);
        if (!incoming_seen.insert(j.incoming).second)
            throw Error(ErrorKind::InvalidTopology, "channel " + std::to_string(j.incoming) + " feeds two junctions", j.incoming);
        if (j.outgoing.empty())
            throw Error(ErrorKind::InvalidTopology, "junction after channel " + std::to_string(j.incoming) + " has no outgoing channel", j.incoming);
        if (j.split_fractions.size() != j.outgoing.size())
            throw Error(ErrorKind::BadSplitSum, "junction after channel " + std::to_string(j.incoming) + ": one split fraction per outgoing channel required", j.incoming);
        double sum = 0.0;
        for (std::size_t k = 0; k < j.outgoing.size(); ++k) {
            const int o = j.outgoing[k];
            if (!ids.count(o))
                throw Error(ErrorKind::InvalidTopology, "junction refers to unknown channel " + std::to_string(o), o);
            const double s = j.split_fractions[k];
            if (!(s > 0.0 && s <= 1.0))
                throw Error(ErrorKind::BadSplitSum, "junction after channel " + std::to_string(j.incoming) + ": split fraction outside (0,1]", j.incoming);
            sum += s;
            if (o == j.incoming)
                throw Error(ErrorKind::CycleDetected, "channel " + std::to_string(o) + " feeds itself", o);
            if (parent.count(o))
                throw Error(ErrorKind::MultipleParents, "channel " + std::to_string(o) + " has parents " +
                            std::to_string(parent[o]) + " and " + std::to_string(j.incoming), o);
            parent[o] = j.incoming;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw Error(ErrorKind::BadSplitSum, "junction after channel " + std::to_string(j.incoming) +
                        ": split fractions sum to " + std::to_string(sum), j.incoming);
    }

    if (auto it = parent.find(topo.root_channel); it != parent.end())
        throw Error(ErrorKind::CycleDetected, "root channel " + std::to_string(topo.root_channel) + " is fed by channel " +
                    std::to_string(it->second), topo.root_channel);

    for (int id : ids) {
        std::set<int> path{id};
        int cur = id;
        while (cur != topo.root_channel) {
            auto it = parent.find(cur);
            if (it == parent.end())
                throw Error(ErrorKind::InvalidTopology, "channel " + std::to_string(cur) + " is not connected to the root", cur);
            cur = it->second;
            if (!path.insert(cur).second)
                throw Error(ErrorKind::CycleDetected, "cycle through channel " + std::to_string(cur), cur);
        }
    }

    ValidationReport report;
    for (const auto& c : topo.channels) {
        if (const Junction* j = topo.junction_at_end(c.id)) {
            report.internal.push_back(c.id);
            report.degree[c.id] = 1 + static_cast<int>(j->outgoing.size());
        } else {
            report.terminal.push_back(c.id);
        }
    }
    return report;
}

std::vector<int> traversal_order(const NetworkTopology& topo) {
    validate_topology(topo);
    std::vector<int> order;
    std::deque<int> queue{topo.root_channel};
    while (!queue.empty()) {
        const int id = queue.front();
        queue.pop_front();
        order.push_back(id);
        if (const Junction* j = topo.junction_at_end(id))
            for (int o : j->outgoing) queue.push_back(o);
    }
    return order;
}

NetworkTopology make_star(const ChannelSpec& trunk, const std::vector<ChannelSpec>& branches,
                          const std::vector<double>& split_fractions) {
    NetworkTopology topo;
    topo.channels.push_back(trunk);
    topo.channels.back().id = 1;
    Junction j;
    j.incoming = 1;
    for (std::size_t k = 0; k < branches.size(); ++k) {
        topo.channels.push_back(branches[k]);
        topo.channels.back().id = static_cast<int>(k) + 2;
        j.outgoing.push_back(static_cast<int>(k) + 2);
    }
    j.split_fractions = split_fractions;
    topo.root_channel = 1;
    if (!branches.empty()) topo.junctions.push_back(j);
    return topo;
}

}  // namespace svnet
