#pragma once

#include <algorithm>
#include <span>

namespace fracfit {

/// Piecewise-linear interpolation on strictly increasing abscissae. The
/// caller guarantees xs.front() <= x <= xs.back().
inline double linear_interp(std::span<const double> xs, std::span<const double> ys, double x) {
    auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) {
        return ys.back();
    }
    const auto hi = static_cast<std::size_t>(it - xs.begin());
    if (*it == x || hi == 0) {
        return ys[hi];
    }
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
}

}  // namespace fracfit
