#include "svnet/gains.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "svnet/characteristics.hpp"
#include "svnet/error.hpp"
#include "svnet/weights.hpp"

namespace svnet {

BoundaryConstants boundary_constants(const SteadyProfile& prof) {
    if (!(prof.Q > 0.0))
        throw Error(ErrorKind::DegenerateFlux, "channel " + std::to_string(prof.channel) + " carries no flux",
                    prof.channel);
    const double c = std::sqrt(prof.g * prof.HL());
    BoundaryConstants bc;
    bc.lambda_plus = c + prof.VL();
    bc.lambda_minus = c - prof.VL();
    bc.m_L = m_value(prof.HL(), prof.H0(), prof.Q, prof.friction_exponent, prof.g);
    return bc;
}

ForbiddenInterval forbidden_interval(double lambda_plus, double lambda_minus, double m_L, double H_L, double g) {
    const double s = std::sqrt(g / H_L);
    const double lp = lambda_plus, ml = m_L * lambda_minus;
    ForbiddenInterval fi;
    if (std::abs(lp - ml) <= 1e-12 * lp) {
        fi.half_line = true;
        fi.a = -std::numeric_limits<double>::infinity();
        fi.b = 0.0;
        return fi;
    }
    if (ml > lp)
        throw Error(ErrorKind::NotAdmissibleInput, "m(L) lambda- exceeds lambda+");
    fi.a = -s * (lp + ml) / (lp - ml);
    fi.b = -s * (lp - ml) / (lp + ml);
    return fi;
}

double reflection_coefficient(double k, double H_L, double g) {
    const double x = k * std::sqrt(H_L / g);
    if (std::abs(x - 1.0) <= 1e-14) throw Error(ErrorKind::ReflectionPole, "gain equals sqrt(g/H) at the terminal");
    return (1.0 + x) / (x - 1.0);
}

double inlet_reflection_coefficient(double k0, double H0, double g) {
    const double c = std::sqrt(g * H0);
    const double den = k0 * H0 - c;
    if (den == 0.0) throw Error(ErrorKind::ReflectionPole, "inlet gain equals sqrt(g/H)");
    return (k0 * H0 + c) / den;
}

GainRecord gain_record(const SteadyProfile& prof, double k) {
    GainRecord r;
    r.channel = prof.channel;
    r.k = k;
    try {
        r.c = reflection_coefficient(k, prof.HL(), prof.g);
    } catch (const Error&) {
        throw Error(ErrorKind::NotAdmissibleInput,
                    "channel " + std::to_string(prof.channel) + ": gain is the reflection pole sqrt(g/H*(L))",
                    prof.channel);
    }
    if (!(prof.Q > 0.0)) {
        r.zero_flux = true;
        r.forbidden.half_line = true;
        r.forbidden.a = -std::numeric_limits<double>::infinity();
        r.forbidden.b = 0.0;
        return r;
    }
    r.constants = boundary_constants(prof);
    r.forbidden = forbidden_interval(r.constants.lambda_plus, r.constants.lambda_minus, r.constants.m_L,
                                     prof.HL(), prof.g);
    return r;
}

void is_admissible(GainRecord& r, double eta_bar_L, double phi_L) {
    r.eta_bar_L = eta_bar_L;
    r.phi_L = phi_L;
    r.admissible = !r.forbidden.contains(r.k);
    if (r.zero_flux) {
        r.reflection_verdict = r.k > 0.0;
        return;
    }
    const double ratio = eta_bar_L / phi_L;
    r.reflection_verdict = r.c * r.c > ratio * ratio;
}

GainRecord evaluate_gain(const SteadyProfile& prof, double k) {
    GainRecord r = gain_record(prof, k);
    if (r.zero_flux) {
        is_admissible(r, 1.0, 1.0);
        return r;
    }
    const CharCoeffs cc = coupling_coefficients(prof);
    const PhiProfiles phi = phi_profiles(cc, prof.fine_step());
    const double eta0_L = cc.lambda2.back() / cc.lambda1.back() * phi.phi.back();
    is_admissible(r, r.constants.m_L * eta0_L, phi.phi.back());
    return r;
}

bool single_channel_conditions(const SteadyProfile& prof, double k0, double kL) {
    if (k0 > 0.0) return false;
    const double c0 = inlet_reflection_coefficient(k0, prof.H0(), prof.g);
    if (c0 * c0 > 1.0) return false;
    return gain_record(prof, kL).forbidden.contains(kL) == false;
}

}  // namespace svnet
