#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fracfit {

/// Uniform time grid starting at t = 0.
class SimGrid {
public:
    SimGrid(double t_end, double step) : t_end_(t_end), step_(step) {
        if (!(step > 0.0) || !std::isfinite(step)) {
            throw std::invalid_argument("SimGrid: step must be positive");
        }
        if (!(t_end > 0.0) || !std::isfinite(t_end)) {
            throw std::invalid_argument("SimGrid: t_end must exceed t_start = 0");
        }
        // The small slack absorbs ratios like 10 / 0.001 landing just under an integer.
        n_points_ = static_cast<std::size_t>(std::floor(t_end / step + 1e-9)) + 1;
    }

    double t_start() const noexcept { return 0.0; }
    double t_end() const noexcept { return t_end_; }
    double step() const noexcept { return step_; }
    std::size_t n_points() const noexcept { return n_points_; }

    double time(std::size_t i) const noexcept { return static_cast<double>(i) * step_; }
    double last_time() const noexcept { return time(n_points_ - 1); }

    std::vector<double> times() const {
        std::vector<double> out(n_points_);
        for (std::size_t i = 0; i < n_points_; ++i) {
            out[i] = time(i);
        }
        return out;
    }

    bool operator==(const SimGrid&) const = default;

private:
    double t_end_;
    double step_;
    std::size_t n_points_;
};

}  // namespace fracfit
