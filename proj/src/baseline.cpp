#include "fracfit/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fracfit/errors.hpp"

namespace fracfit {

void BeamGeometry::validate() const {
    for (double v : {young_modulus, width, thickness, length0}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("BeamGeometry: all fields must be positive and finite");
        }
    }
}

void NonlinearParams::validate() const {
    const bool finite = std::isfinite(m_eq) && std::isfinite(c_np) && std::isfinite(k_np) &&
                        std::isfinite(n_p) && std::isfinite(delta_np) && std::isfinite(force);
    if (!finite) {
        throw std::invalid_argument("NonlinearParams: non-finite field");
    }
    if (!(m_eq > 0.0)) {
        throw std::invalid_argument("NonlinearParams: m_eq must be positive");
    }
    if (!(k_np > 0.0)) {
        throw std::invalid_argument("NonlinearParams: k_np must be positive");
    }
    if (!(n_p >= 1.0)) {
        throw std::invalid_argument("NonlinearParams: n_p must be >= 1");
    }
    if (!(n_p + delta_np > 0.0)) {
        throw std::invalid_argument("NonlinearParams: n_p + delta_np must be positive");
    }
}

double NonlinearParams::steady_state() const {
    return std::pow(force / k_np, 1.0 / exponent());
}

NonlinearParams default_nonlinear_params(double k_np) {
    NonlinearParams p;
    p.k_np = k_np;
    p.c_np = 0.8 * std::sqrt(k_np * p.m_eq);
    p.force = k_np;
    return p;
}

double moment_inertia(const BeamGeometry& geom, double n_p) {
    geom.validate();
    if (!(n_p >= 1.0)) {
        throw std::invalid_argument("moment_inertia: n_p must be >= 1");
    }
    return std::pow(0.5, n_p) / (2.0 + n_p) * geom.width * std::pow(geom.thickness, 2.0 + n_p);
}

double stiffness(const BeamGeometry& geom, double n_p) {
    const double inertia = moment_inertia(geom, n_p);
    return std::pow((n_p + 1.0) / n_p, n_p) * geom.young_modulus * inertia /
           std::pow(geom.length0, n_p + 1.0);
}

StepTrace simulate_nonlinear(const NonlinearParams& params, const SimGrid& grid) {
    params.validate();
    if (params.force < 0.0) {
        throw std::invalid_argument("simulate_nonlinear: force must be non-negative");
    }
    const double p = params.exponent();
    const double inv_m = 1.0 / params.m_eq;
    const double limit = 10.0 * params.steady_state();

    auto accel = [&](double theta, double omega) {
        return (params.force - params.c_np * omega -
                params.k_np * std::pow(std::max(theta, 0.0), p)) * inv_m;
    };

    const double h = grid.step();
    const std::size_t n = grid.n_points();
    std::vector<double> values(n, 0.0);
    double theta = 0.0;
    double omega = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double k1x = omega;
        const double k1v = accel(theta, omega);
        const double k2x = omega + 0.5 * h * k1v;
        const double k2v = accel(theta + 0.5 * h * k1x, k2x);
        const double k3x = omega + 0.5 * h * k2v;
        const double k3v = accel(theta + 0.5 * h * k2x, k3x);
        const double k4x = omega + h * k3v;
        const double k4v = accel(theta + h * k3x, k4x);
        theta += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        omega += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if (!std::isfinite(theta) || std::fabs(theta) > limit) {
            throw InstabilityError("simulate_nonlinear: diverged at t = " +
                                   std::to_string(grid.time(i)));
        }
        values[i] = theta;
    }
    return StepTrace(grid.times(), std::move(values), 1.0, "nonlinear", false);
}

}  // namespace fracfit
