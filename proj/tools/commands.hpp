#pragma once

#include <filesystem>
#include <iosfwd>

#include "config.hpp"

namespace svnet::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kSteadyFailure = 2,
    kBadGainInput = 3,
    kCertificateFailed = 4,
    kSimulationFailure = 5,
};

/** Writes steady_<id>.csv per channel and steady_summary.json. */
int cmd_steady(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/** Writes gains.json with one record per terminal channel. */
int cmd_gains(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/** Writes certificate.json; exit code 4 when the certificate fails. */
int cmd_certify(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

/** Writes the trace CSV, snapshot_<n>.csv files and simulate.json. */
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

}  // namespace svnet::cli
