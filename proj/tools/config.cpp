#include "config.hpp"

#include <fstream>

namespace svnet::cli {

namespace {

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

ChannelBump parse_bump(const nlohmann::json& j) {
    ChannelBump b;
    b.channel = j.at("channel").get<int>();
    b.center = get_or(j, "center", b.center);
    b.width = get_or(j, "width", b.width);
    b.weight_h = get_or(j, "weight_h", b.weight_h);
    b.weight_v = get_or(j, "weight_v", b.weight_v);
    return b;
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
    RunConfig c;
    try {
        const auto& net = j.at("network");
        const double g = get_or(net, "gravity", 9.81);
        for (const auto& ch : net.at("channels")) {
            ChannelSpec s;
            s.id = ch.at("id").get<int>();
            s.length = ch.at("length").get<double>();
            s.friction = get_or(ch, "friction", s.friction);
            s.friction_exponent = get_or(ch, "friction_exponent", s.friction_exponent);
            s.cells = get_or(ch, "cells", s.cells);
            s.gravity = g;
            c.network.channels.push_back(s);
        }
        c.network.root_channel = get_or(net, "root_channel", 1);
        if (net.contains("junctions"))
            for (const auto& jn : net.at("junctions"))
                c.network.junctions.push_back({jn.at("incoming").get<int>(), jn.at("outgoing").get<std::vector<int>>(),
                                               jn.at("split_fractions").get<std::vector<double>>()});
        c.Q_root = j.at("root").at("Q").get<double>();
        c.H_root = j.at("root").at("H0").get<double>();
        if (j.contains("gains"))
            for (const auto& [key, value] : j.at("gains").items()) c.gains[std::stoi(key)] = value.get<double>();
        if (j.contains("lyapunov")) c.epsilon_start = get_or(j.at("lyapunov"), "epsilon_start", c.epsilon_start);
        if (j.contains("simulation")) {
            const auto& s = j.at("simulation");
            auto& sim = c.simulation;
            const auto mode = get_or<std::string>(s, "mode", "linear");
            if (mode == "linear")
                sim.mode = SimMode::Linear;
            else if (mode == "nonlinear")
                sim.mode = SimMode::Nonlinear;
            else
                throw ConfigError("simulation.mode must be \"linear\" or \"nonlinear\"");
            sim.T = get_or(s, "T", sim.T);
            sim.cfl = get_or(s, "cfl", sim.cfl);
            sim.sample_stride = get_or(s, "sample_stride", sim.sample_stride);
            sim.snapshot_times = get_or(s, "snapshot_times", sim.snapshot_times);
            sim.trace_file = get_or(s, "trace_file", sim.trace_file);
            if (s.contains("fit_window")) {
                const auto w = s.at("fit_window").get<std::vector<double>>();
                if (w.size() != 2) throw ConfigError("simulation.fit_window must have two entries");
                sim.fit_window = std::pair{w[0], w[1]};
            }
            if (s.contains("perturbation")) {
                const auto& p = s.at("perturbation");
                sim.perturbation.amplitude = get_or(p, "amplitude", 0.0);
                if (p.contains("bumps"))
                    for (const auto& b : p.at("bumps")) sim.perturbation.bumps.push_back(parse_bump(b));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    auto channels = nlohmann::json::array();
    for (const auto& s : c.network.channels)
        channels.push_back({{"id", s.id},
                            {"length", s.length},
                            {"friction", s.friction},
                            {"friction_exponent", s.friction_exponent},
                            {"cells", s.cells}});
    auto junctions = nlohmann::json::array();
    for (const auto& jn : c.network.junctions)
        junctions.push_back(
            {{"incoming", jn.incoming}, {"outgoing", jn.outgoing}, {"split_fractions", jn.split_fractions}});
    j["network"] = {{"gravity", c.network.channels.empty() ? 9.81 : c.network.channels.front().gravity},
                    {"root_channel", c.network.root_channel},
                    {"channels", channels},
                    {"junctions", junctions}};
    j["root"] = {{"Q", c.Q_root}, {"H0", c.H_root}};
    nlohmann::json gains = nlohmann::json::object();
    for (const auto& [id, k] : c.gains) gains[std::to_string(id)] = k;
    j["gains"] = gains;
    j["lyapunov"] = {{"epsilon_start", c.epsilon_start}};
    const auto& s = c.simulation;
    auto bumps = nlohmann::json::array();
    for (const auto& b : s.perturbation.bumps)
        bumps.push_back({{"channel", b.channel},
                         {"center", b.center},
                         {"width", b.width},
                         {"weight_h", b.weight_h},
                         {"weight_v", b.weight_v}});
    j["simulation"] = {{"mode", s.mode == SimMode::Linear ? "linear" : "nonlinear"},
                       {"T", s.T},
                       {"cfl", s.cfl},
                       {"sample_stride", s.sample_stride},
                       {"snapshot_times", s.snapshot_times},
                       {"trace_file", s.trace_file},
                       {"perturbation", {{"amplitude", s.perturbation.amplitude}, {"bumps", bumps}}}};
    if (s.fit_window) j["simulation"]["fit_window"] = {s.fit_window->first, s.fit_window->second};
    return j;
}

std::vector<int> missing_gains(const RunConfig& config) {
    std::vector<int> out;
    for (const auto& ch : config.network.channels)
        if (config.network.is_terminal(ch.id) && !config.gains.count(ch.id)) out.push_back(ch.id);
    return out;
}

}  // namespace svnet::cli
