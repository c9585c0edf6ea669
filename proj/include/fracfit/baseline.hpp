#pragma once

#include "fracfit/grid.hpp"
#include "fracfit/trace.hpp"

namespace fracfit {

/// Cantilever geometry of the actuator's strain-limiting layer (SI units).
struct BeamGeometry {
    double young_modulus = 0.0;  // Pa
    double width = 0.0;          // m
    double thickness = 0.0;      // m
    double length0 = 0.0;        // m

    void validate() const;
};

/// Lumped nonlinear model M theta'' + C theta' + K theta^(n_p + delta_np) = F.
struct NonlinearParams {
    double m_eq = 1.0;
    double c_np = 0.0;
    double k_np = 1.0;
    double n_p = 1.5;
    double delta_np = 0.0;
    double force = 1.0;

    void validate() const;
    double exponent() const noexcept { return n_p + delta_np; }
    /// theta with K theta^p = F.
    double steady_state() const;
};

/// Documented defaults for a given stiffness: m_eq = 1, c = 0.8 sqrt(k m_eq),
/// n_p = 1.5, delta = 0, force = k (steady state 1).
NonlinearParams default_nonlinear_params(double k_np);

/// (1/2)^n (1/(2+n)) b h^(2+n).
double moment_inertia(const BeamGeometry& geom, double n_p);

/// ((n+1)/n)^n E I_n / L0^(n+1).
double stiffness(const BeamGeometry& geom, double n_p);

/// Classical RK4 at the grid step from rest. The power term uses max(theta, 0).
/// Throws InstabilityError when |theta| exceeds ten times the steady state.
/// The trace carries theta directly (setpoint 1, trial_id "nonlinear").
StepTrace simulate_nonlinear(const NonlinearParams& params, const SimGrid& grid);

}  // namespace fracfit
