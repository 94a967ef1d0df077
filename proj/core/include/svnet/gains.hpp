#pragma once

#include "svnet/steady_state.hpp"

namespace svnet {

/** lambda+ = sqrt(gH*(L)) + V*(L), lambda- = sqrt(gH*(L)) - V*(L), and m at x = L. */
struct BoundaryConstants {
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double m_L = 1.0;
};

BoundaryConstants boundary_constants(const SteadyProfile& prof);

/** Closed set [a, b] of gains excluded at a terminal; `half_line` means a = -inf. */
struct ForbiddenInterval {
    double a = 0.0;
    double b = 0.0;
    bool half_line = false;
    bool contains(double k) const { return k <= b && (half_line || k >= a); }
};

ForbiddenInterval forbidden_interval(double lambda_plus, double lambda_minus, double m_L, double H_L, double g);

/** c = (1 + k sqrt(H/g)) / (k sqrt(H/g) - 1); ReflectionPole at k = sqrt(g/H). */
double reflection_coefficient(double k, double H_L, double g);

/** c0 = (k0 H + sqrt(gH)) / (k0 H - sqrt(gH)) at the inlet of a single channel. */
double inlet_reflection_coefficient(double k0, double H0, double g);

struct GainRecord {
    int channel = 0;
    double k = 0.0;
    BoundaryConstants constants;
    ForbiddenInterval forbidden;
    double c = 0.0;
    bool zero_flux = false;          ///< V*(L) = 0: verdict is k > 0
    bool admissible = false;         ///< k outside the forbidden interval
    double eta_bar_L = 0.0;
    double phi_L = 1.0;
    bool reflection_verdict = false; ///< c^2 > eta_bar(L)^2 / phi(L)^2
    bool verdicts_agree() const { return admissible == reflection_verdict; }
};

/** Constants, interval and reflection coefficient; NotAdmissibleInput at the pole. */
GainRecord gain_record(const SteadyProfile& prof, double k);

/** Fills both verdicts from independently computed eta_bar(L) and phi(L). */
void is_admissible(GainRecord& record, double eta_bar_L, double phi_L);

/** gain_record + is_admissible with eta_bar(L) from the closed form and phi(L) by quadrature. */
GainRecord evaluate_gain(const SteadyProfile& prof, double k);

/** Inlet gain in (-inf, 0] and outlet gain outside its forbidden interval. */
bool single_channel_conditions(const SteadyProfile& prof, double k0, double kL);

}  // namespace svnet
