#pragma once

// Ordinary least-squares line fit, used by the decay diagnostics and the
// continuous-dependence probe.

#include <cstddef>
#include <vector>

namespace conewave {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t count = 0;
};

inline LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    LineFit fit;
    const std::size_t n = xs.size();
    fit.count = n;
    if (n < 2) return fit;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) { sx += xs[i]; sy += ys[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace conewave
