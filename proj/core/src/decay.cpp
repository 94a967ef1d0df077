#include "svnet/decay.hpp"

#include <cmath>
#include <vector>

#include "svnet/error.hpp"

namespace svnet {

DecayFit decay_fit(std::span<const double> t, std::span<const double> V, double t_begin, double t_end) {
    DecayFit fit;
    fit.t_begin = t_begin;
    fit.t_end = t_end;
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_begin || t[k] > t_end) continue;
        if (!(V[k] > 0.0))
            throw Error(ErrorKind::NonPositiveV, "V(t) must be positive in the fit window", -1, t[k]);
        ts.push_back(t[k]);
        ys.push_back(std::log(V[k]));
    }
    const std::size_t n = ts.size();
    fit.samples = static_cast<int>(n);
    if (n < 2) throw Error(ErrorKind::NonPositiveV, "fewer than two samples in the fit window");
    double tm = 0, ym = 0;
    for (std::size_t k = 0; k < n; ++k) {
        tm += ts[k];
        ym += ys[k];
    }
    tm /= static_cast<double>(n);
    ym /= static_cast<double>(n);
    double sxx = 0, sxy = 0, ss_tot = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (ts[k] - tm) * (ts[k] - tm);
        sxy += (ts[k] - tm) * (ys[k] - ym);
        ss_tot += (ys[k] - ym) * (ys[k] - ym);
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.nu_hat = -slope;
    double ss_res = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = ys[k] - (ym + slope * (ts[k] - tm));
        ss_res += r * r;
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace svnet
