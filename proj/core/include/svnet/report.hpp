#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svnet/certificate.hpp"
#include "svnet/gains.hpp"
#include "svnet/simulator.hpp"
#include "svnet/steady_state.hpp"

namespace svnet {

/** Scientific notation with 17 significant digits ("%.16e"); round-trips binary64. */
std::string format_number(double value);

/** Per channel: Q, depths at both ends, critical depth, blow-up bound and its margin over L. */
nlohmann::json steady_summary_json(const std::vector<SteadyProfile>& profiles);

/** {channel, a, b, half_line, k, admissible, c, eta_bar_L, phi_L}; infinite ends are null. */
nlohmann::json gain_record_json(const GainRecord& record);

nlohmann::json certificate_json(const NetworkCertificate& cert);

/** Columns t, V, V_ext, l2_norm, boundary_B, then l2_<id> per channel. */
void write_trace_csv(std::ostream& os, const LyapunovTrace& trace, const std::vector<int>& channel_ids);

}  // namespace svnet
