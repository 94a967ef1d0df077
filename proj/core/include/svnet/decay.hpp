#pragma once

#include <span>

namespace svnet {

struct DecayFit {
    double nu_hat = 0.0;   ///< minus the least-squares slope of ln V, 1/s
    double r2 = 1.0;       ///< coefficient of determination; 1 when ln V is constant
    double t_begin = 0.0;
    double t_end = 0.0;
    int samples = 0;
};

/** Fits ln V(t) = c - nu t over samples with t in [t_begin, t_end]. Throws NonPositiveV. */
DecayFit decay_fit(std::span<const double> t, std::span<const double> V, double t_begin, double t_end);

}  // namespace svnet
