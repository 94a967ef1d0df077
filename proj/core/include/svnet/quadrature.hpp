#pragma once

#include <span>
#include <vector>

namespace svnet {

/**
 * Running integral of samples `f` on a uniform grid of spacing `h`.
 * Even nodes use composite Simpson; odd nodes add a three-point partial panel.
 */
std::vector<double> cumulative_simpson(std::span<const double> f, double h);

/** Composite trapezoid rule on arbitrary (sorted) nodes. */
double trapezoid(std::span<const double> x, std::span<const double> f);

}  // namespace svnet
