#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "svnet/simulator.hpp"
#include "svnet/topology.hpp"

namespace svnet::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimulationConfig {
    SimMode mode = SimMode::Linear;
    double T = 1000.0;
    double cfl = 0.9;
    int sample_stride = 10;
    Perturbation perturbation;
    std::vector<double> snapshot_times;
    std::string trace_file = "trace.csv";
    std::optional<std::pair<double, double>> fit_window;
};

struct RunConfig {
    NetworkTopology network;
    double Q_root = 1.0;
    double H_root = 1.0;
    std::map<int, double> gains;
    double epsilon_start = 1e-3;
    SimulationConfig simulation;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

/** Terminal channels without a gain entry. */
std::vector<int> missing_gains(const RunConfig& config);

}  // namespace svnet::cli
