#pragma once

#include <utility>
#include <vector>

#include "svnet/steady_state.hpp"

namespace svnet {

/** lambda1 = V + sqrt(gH), lambda2 = sqrt(gH) - V. */
struct Speeds {
    double lambda1;
    double lambda2;
};

Speeds eigenvalues(double H, double V, double g);

struct Coupling {
    double gamma1, delta1, gamma2, delta2;
};

/** Coupling coefficients written with the friction law. */
Coupling coupling_friction_form(double H, double V, double C, double p, double g);

/** Same coefficients written with the steady depth gradient dH/dx. */
Coupling coupling_gradient_form(double H, double V, double dHdx, double p, double g);

/** Speeds and coupling coefficients on the fine grid of a steady profile. */
struct CharCoeffs {
    std::vector<double> lambda1, lambda2, gamma1, delta1, gamma2, delta2;
    double form_gap = 0.0;  ///< max relative gap between the two algebraic forms
};

/** Throws FormMismatch when the two forms differ by more than `tol` (relative). */
CharCoeffs coupling_coefficients(const SteadyProfile& profile, double tol = 1e-10);

/** Linear Riemann variables y1 = v + h sqrt(g/H*), y2 = v - h sqrt(g/H*). */
std::pair<double, double> riemann_forward(double h, double v, double H_star, double g);
/** Returns (h, v). */
std::pair<double, double> riemann_inverse(double y1, double y2, double H_star, double g);

/** y1 = V - V* + 2 sqrt(gH) - 2 sqrt(gH*), y2 = V - V* - 2 sqrt(gH) + 2 sqrt(gH*). */
std::pair<double, double> nonlinear_change(double H, double V, double H_star, double V_star, double g);
/** Returns (H, V). */
std::pair<double, double> nonlinear_inverse(double y1, double y2, double H_star, double V_star, double g);

}  // namespace svnet
