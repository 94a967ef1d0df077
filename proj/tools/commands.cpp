#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "svnet/decay.hpp"
#include "svnet/error.hpp"
#include "svnet/report.hpp"

namespace svnet::cli {

namespace {

bool is_topology_error(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidChannel:
        case ErrorKind::InvalidTopology:
        case ErrorKind::CycleDetected:
        case ErrorKind::MultipleParents:
        case ErrorKind::BadSplitSum:
            return true;
        default:
            return false;
    }
}

int report_error(const Error& e, int code, std::ostream& log) {
    log << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return code;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto os = open_output(path);
    os << j.dump(2) << '\n';
}

/** Steady profiles, or an exit code when the solve fails. */
struct SteadyOutcome {
    std::vector<SteadyProfile> profiles;
    int code = kOk;
};

SteadyOutcome solve_steady(const RunConfig& config, std::ostream& log) {
    SteadyOutcome r;
    try {
        r.profiles = solve_network_steady(config.network, config.Q_root, config.H_root);
    } catch (const Error& e) {
        r.code = report_error(e, is_topology_error(e.kind()) ? kConfigError : kSteadyFailure, log);
        if (r.code == kSteadyFailure && e.channel() >= 0) log << "failing channel: " << e.channel() << '\n';
    }
    return r;
}

int check_gains(const RunConfig& config, std::ostream& log) {
    const auto missing = missing_gains(config);
    if (missing.empty()) return kOk;
    log << "error [MissingGain]: no gain for terminal channel(s)";
    for (int id : missing) log << ' ' << id;
    log << '\n';
    return kBadGainInput;
}

std::string snapshot_name(std::size_t n) {
    std::ostringstream s;
    s << "snapshot_" << n << ".csv";
    return s.str();
}

}  // namespace

int cmd_steady(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
    auto steady = solve_steady(config, log);
    if (steady.code != kOk) return steady.code;
    std::filesystem::create_directories(out);
    for (const auto& p : steady.profiles) {
        auto os = open_output(out / ("steady_" + std::to_string(p.channel) + ".csv"));
        write_profile_csv(os, p);
    }
    write_json(out / "steady_summary.json", steady_summary_json(steady.profiles));
    return kOk;
}

int cmd_gains(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
    auto steady = solve_steady(config, log);
    if (steady.code != kOk) return steady.code;
    if (int code = check_gains(config, log); code != kOk) return code;
    auto records = nlohmann::json::array();
    try {
        for (std::size_t i = 0; i < config.network.channels.size(); ++i) {
            const int id = config.network.channels[i].id;
            if (!config.network.is_terminal(id)) continue;
            records.push_back(gain_record_json(evaluate_gain(steady.profiles[i], config.gains.at(id))));
        }
    } catch (const Error& e) {
        return report_error(e, kBadGainInput, log);
    }
    std::filesystem::create_directories(out);
    write_json(out / "gains.json", records);
    return kOk;
}

int cmd_certify(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
    auto steady = solve_steady(config, log);
    if (steady.code != kOk) return steady.code;
    if (int code = check_gains(config, log); code != kOk) return code;
    NetworkCertificate cert;
    try {
        CertifyOptions opt;
        opt.epsilon = config.epsilon_start;
        cert = certify_network(config.network, steady.profiles, config.gains, opt);
    } catch (const Error& e) {
        return report_error(e, kBadGainInput, log);
    }
    std::filesystem::create_directories(out);
    write_json(out / "certificate.json", certificate_json(cert));
    if (!cert.certified) {
        log << "certificate failed: " << cert.reason << '\n';
        return kCertificateFailed;
    }
    return kOk;
}

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log) {
    auto steady = solve_steady(config, log);
    if (steady.code != kOk) return steady.code;
    if (int code = check_gains(config, log); code != kOk) return code;
    const auto& sc = config.simulation;
    if (!(sc.T > 0.0) || sc.sample_stride < 1) {
        log << "error: simulation.T must be positive and simulation.sample_stride at least 1\n";
        return kConfigError;
    }

    bool certified = false;
    double epsilon = 0.0;
    std::vector<WeightSet> weights;
    try {
        CertifyOptions opt;
        opt.epsilon = config.epsilon_start;
        auto cert = certify_network(config.network, steady.profiles, config.gains, opt);
        certified = cert.certified;
        epsilon = cert.epsilon;
        weights = std::move(cert.weights);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ReflectionPole || e.kind() == ErrorKind::NotAdmissibleInput)
            return report_error(e, kBadGainInput, log);
    }
    if (!certified) log << "warning: certificate failed, using unit weights\n";

    std::filesystem::create_directories(out);
    LyapunovTrace trace;
    std::vector<int> ids;
    double cfl_dt = 0.0;
    try {
        NetworkSimulator sim(config.network, steady.profiles, config.gains, SimOptions{sc.mode, sc.cfl});
        if (certified) sim.set_weights(weights);
        sim.perturb(sc.perturbation);
        cfl_dt = sim.dt();
        for (std::size_t i = 0; i < sim.channel_count(); ++i) ids.push_back(sim.channel_id(i));

        std::vector<double> times = sc.snapshot_times;
        std::sort(times.begin(), times.end());
        std::size_t next = 0;
        auto dump = [&](const NetworkSimulator& s) {
            while (next < times.size() && s.time() >= times[next] - 1e-9 * s.dt()) {
                auto os = open_output(out / snapshot_name(next));
                s.write_snapshot(os);
                ++next;
            }
        };
        dump(sim);
        trace = run(sim, sc.T, sc.sample_stride, dump);
    } catch (const Error& e) {
        return report_error(e, kSimulationFailure, log);
    }

    {
        auto os = open_output(out / sc.trace_file);
        write_trace_csv(os, trace, ids);
    }

    std::vector<double> t, V;
    for (const auto& s : trace.samples) {
        t.push_back(s.t);
        V.push_back(s.V);
    }
    const double V0 = V.front(), VT = V.back();
    const bool zero_trace = !(V0 > 0.0);
    nlohmann::json result;
    result["mode"] = sc.mode == SimMode::Linear ? "linear" : "nonlinear";
    result["zero_trace"] = zero_trace;
    result["V0"] = V0;
    result["VT"] = VT;
    result["V_ext0"] = trace.samples.front().V_ext;
    result["V_extT"] = trace.samples.back().V_ext;
    result["cfl_dt"] = cfl_dt;
    result["steps"] = trace.steps;
    result["t_final"] = t.back();
    result["certified"] = certified;
    result["epsilon"] = epsilon;
    result["max_junction_residual"] = trace.max_junction_residual;
    result["max_mass_residual"] = trace.max_mass_residual;
    if (zero_trace) {
        result["nu_hat"] = 0.0;
        result["r2"] = 1.0;
    } else {
        const double t0 = sc.fit_window ? sc.fit_window->first : 0.0;
        const double t1 = sc.fit_window ? sc.fit_window->second : t.back();
        try {
            const auto fit = decay_fit(t, V, t0, t1);
            result["nu_hat"] = fit.nu_hat;
            result["r2"] = fit.r2;
            result["fit_window"] = {fit.t_begin, fit.t_end};
            result["fit_samples"] = fit.samples;
        } catch (const Error& e) {
            return report_error(e, kSimulationFailure, log);
        }
    }
    write_json(out / "simulate.json", result);
    return kOk;
}

}  // namespace svnet::cli
