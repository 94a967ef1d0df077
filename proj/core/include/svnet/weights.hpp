#pragma once

#include <span>
#include <vector>

#include "svnet/characteristics.hpp"
#include "svnet/steady_state.hpp"

namespace svnet {

struct PhiProfiles {
    std::vector<double> phi1;  ///< exp(int gamma1/lambda1)
    std::vector<double> phi2;  ///< exp(-int delta2/lambda2)
    std::vector<double> phi;   ///< phi1/phi2
};

/** Profiles on the fine grid of spacing `fine_step`, by cumulative Simpson quadrature. */
PhiProfiles phi_profiles(const CharCoeffs& cc, double fine_step);

/** eta0 = (lambda2/lambda1) phi. */
std::vector<double> eta_zero(const CharCoeffs& cc, const PhiProfiles& phi);

/**
 * Sup over the grid of |eta0' - |G + I eta0^2|| relative to |eta0'|, with
 * G = delta1 phi/lambda1 and I = gamma2/(lambda2 phi); eta0' is taken by the
 * chain rule through the steady ODE.
 */
double eta_zero_residual(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi);

/** Closed-form m at depth H for a channel with inlet depth H0. */
double m_value(double H, double H0, double Q, double p, double g);

/** m on the fine grid; DegenerateFlux when Q = 0. */
std::vector<double> m_profile(const SteadyProfile& prof);

/** eta_bar = m eta0. */
std::vector<double> eta_bar_closed(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi);

/**
 * Reference solution of eta' = |G + I eta^2| + eps from `eta_init`, integrated
 * together with the steady depth and ln(phi) by adaptive Runge-Kutta and sampled
 * on the fine grid. Throws RiccatiBlowup if eta exceeds 1e12 max(1, phi) or the
 * integration fails.
 */
std::vector<double> riccati_profile(const SteadyProfile& prof, double eps, double eta_init, double tol = 1e-11);

/** eta_bar from its Riccati equation with eta_bar(0) = 1. */
std::vector<double> eta_bar_ode_oracle(const SteadyProfile& prof, double tol = 1e-11);

struct QuadratureCheck {
    std::vector<double> lhs;     ///< running integral on the fine grid
    double rhs = 0.0;            ///< lambda1(0)/(lambda1(0) - lambda2(0))
    std::vector<double> margin;  ///< rhs - lhs
    double min_margin = 0.0;
};

/** Running integral bound that keeps eta_bar below phi; margin must stay positive. */
QuadratureCheck quadrature_check(const SteadyProfile& prof, const CharCoeffs& cc, const PhiProfiles& phi);

/** eta with eps > 0; eta(0) = lambda2(0)/lambda1(0) + eps on the trunk, 1 + eps otherwise. */
std::vector<double> eta_eps(const SteadyProfile& prof, const CharCoeffs& cc, double eps, bool is_trunk);

struct WeightPair {
    std::vector<double> f1, f2;
};

/** f1 = alpha phi1^2/(lambda1 eta), f2 = alpha phi2^2 eta/lambda2. */
WeightPair weights(const CharCoeffs& cc, std::span<const double> phi1, std::span<const double> phi2,
                   std::span<const double> eta, double alpha);

/** Everything the certificate and the Lyapunov functional need for one channel. */
struct WeightSet {
    int channel = 0;
    bool is_trunk = false;
    double epsilon = 0.0;
    double alpha = 1.0;
    std::vector<double> x;
    PhiProfiles phi;
    std::vector<double> eta0, m, eta_bar;   ///< m and eta_bar empty when Q = 0
    std::vector<double> eta, eta_prime;     ///< eps-perturbed eta and its derivative
    std::vector<double> f1, f2;             ///< scaled by alpha
    std::vector<double> Z_tilde, W_tilde;   ///< lambda1 f1 -/+ lambda2 f2 at alpha = 1

    double Z(std::size_t k) const { return alpha * Z_tilde[k]; }
    double W(std::size_t k) const { return alpha * W_tilde[k]; }
    void set_alpha(double a);
};

WeightSet build_weight_set(const SteadyProfile& prof, const CharCoeffs& cc, double eps, bool is_trunk);

/** Sum over channels of the trapezoid integral of f1 y1^2 + f2 y2^2 on the given nodes. */
double lyapunov_value(std::span<const double> x, std::span<const double> f1, std::span<const double> f2,
                      std::span<const double> y1, std::span<const double> y2);

}  // namespace svnet
