// Log-log least-squares rate fitting for convergence tables.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace polyharm {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;  // of log err vs log p
    double residual = 0.0;   // rms of log residuals
    std::vector<size_t> excluded;  // indices with err <= 0, flagged out
};

/// Least-squares line through (log p, log err). Entries with err <= 0 are
/// excluded and flagged; at least 3 usable pairs are required.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<double> lx, ly;
    RateFit fit;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].second <= 0.0 || pairs[i].first <= 0.0) {
            fit.excluded.push_back(i);
            continue;
        }
        lx.push_back(std::log(pairs[i].first));
        ly.push_back(std::log(pairs[i].second));
    }
    size_t n = lx.size();
    if (n < 3) throw std::invalid_argument("fit_rate: fewer than 3 usable pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-30) throw std::invalid_argument("fit_rate: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy * sxx - sx * sxy) / det;
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace polyharm
