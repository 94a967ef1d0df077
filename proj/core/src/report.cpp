#include "svnet/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace svnet {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json matrix_json(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (const auto& row : m) out.push_back(row);
    return out;
}

}  // namespace

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", value);
    return buf;
}

nlohmann::json steady_summary_json(const std::vector<SteadyProfile>& profiles) {
    auto out = nlohmann::json::array();
    for (const auto& p : profiles) {
        out.push_back({{"channel", p.channel},
                       {"Q", p.Q},
                       {"H_star_0", p.H0()},
                       {"H_star_L", p.HL()},
                       {"V_star_0", p.V0()},
                       {"V_star_L", p.VL()},
                       {"length", p.length},
                       {"critical_depth", p.critical_depth},
                       {"blowup_bound", number(p.blowup_bound)},
                       {"blowup_margin", number(p.blowup_bound - p.length)}});
    }
    return out;
}

nlohmann::json gain_record_json(const GainRecord& r) {
    return {{"channel", r.channel},
            {"a", r.forbidden.half_line ? nlohmann::json(nullptr) : number(r.forbidden.a)},
            {"b", number(r.forbidden.b)},
            {"half_line", r.forbidden.half_line},
            {"k", r.k},
            {"admissible", r.admissible},
            {"c", number(r.c)},
            {"eta_bar_L", r.zero_flux ? nlohmann::json(nullptr) : number(r.eta_bar_L)},
            {"phi_L", number(r.phi_L)},
            {"zero_flux", r.zero_flux},
            {"lambda_plus", r.constants.lambda_plus},
            {"lambda_minus", r.constants.lambda_minus},
            {"m_L", r.zero_flux ? nlohmann::json(nullptr) : number(r.constants.m_L)}};
}

nlohmann::json certificate_json(const NetworkCertificate& cert) {
    nlohmann::json j;
    j["certified"] = cert.certified;
    j["reason"] = cert.reason;
    j["failures"] = cert.failures;
    j["epsilon"] = cert.epsilon;
    j["halvings"] = cert.halvings;
    j["root"] = {{"F1", number(cert.F1)}, {"positive", cert.root_positive}};
    auto junctions = nlohmann::json::array();
    for (const auto& jm : cert.junctions) {
        junctions.push_back({{"incoming", jm.incoming},
                             {"outgoing", jm.outgoing},
                             {"Z_in_L", jm.Z_in},
                             {"Z_out_0", jm.Z_out},
                             {"M", matrix_json(jm.M)},
                             {"M_bar", matrix_json(jm.M_bar)},
                             {"max_abs_omega", jm.max_abs_omega},
                             {"min_eigenvalue", jm.min_eigenvalue},
                             {"norm", jm.norm},
                             {"det_eigen", jm.det_eigen},
                             {"det_transformed", jm.det_transformed},
                             {"positive", jm.positive}});
    }
    j["junctions"] = junctions;
    auto terminals = nlohmann::json::array();
    for (const auto& t : cert.terminals)
        terminals.push_back({{"channel", t.channel},
                             {"k", t.k},
                             {"c", t.c},
                             {"margin", t.margin},
                             {"scale", t.scale},
                             {"positive", t.positive}});
    j["terminals"] = terminals;
    auto channels = nlohmann::json::array();
    for (const auto& c : cert.channels)
        channels.push_back({{"channel", c.channel},
                            {"is_trunk", c.is_trunk},
                            {"alpha", c.alpha},
                            {"Z_0", c.Z0},
                            {"Z_L", c.ZL},
                            {"interior_min_eigenvalue", number(c.interior.min_eigenvalue)},
                            {"interior_min_relative", number(c.interior.min_relative)},
                            {"interior_x_at_min", c.interior.x_at_min},
                            {"interior_positive", c.interior.positive}});
    j["channels"] = channels;
    return j;
}

void write_trace_csv(std::ostream& os, const LyapunovTrace& trace, const std::vector<int>& channel_ids) {
    os << "t,V,V_ext,l2_norm,boundary_B";
    for (int id : channel_ids) os << ",l2_" << id;
    os << '\n';
    for (const auto& s : trace.samples) {
        os << format_number(s.t) << ',' << format_number(s.V) << ',' << format_number(s.V_ext) << ','
           << format_number(s.l2) << ',' << format_number(s.B);
        for (double v : s.channel_l2) os << ',' << format_number(v);
        os << '\n';
    }
}

}  // namespace svnet
