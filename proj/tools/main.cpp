#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace svnet::cli;
    CLI::App app{"Boundary stabilization of Saint-Venant flows on channel networks"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    unsigned long seed = 0;
    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "reserved; perturbations are read from the configuration");
        return sub;
    };
    auto* steady = add("steady", "steady profiles and summary");
    auto* gains = add("gains", "forbidden intervals and reflection verdicts per terminal");
    auto* certify = add("certify", "Lyapunov certificate");
    auto* simulate = add("simulate", "perturbed simulation, Lyapunov trace and decay fit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    try {
        if (steady->parsed()) return cmd_steady(config, out_dir, std::cerr);
        if (gains->parsed()) return cmd_gains(config, out_dir, std::cerr);
        if (certify->parsed()) return cmd_certify(config, out_dir, std::cerr);
        if (simulate->parsed()) return cmd_simulate(config, out_dir, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}
