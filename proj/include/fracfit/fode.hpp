#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fracfit/grid.hpp"
#include "fracfit/special.hpp"
#include "fracfit/trace.hpp"

namespace fracfit {

/// G(s) = b0 / (s^alpha2 + a1 s^alpha1 + a0), the normalized three-term
/// fractional model with a1 = 2 zeta wn and a0 = wn^2.
///
/// Valid when 0 < alpha1 < alpha2 <= 2, a0 > 0, a1 >= 0, b0 > 0. The upper
/// order is allowed to reach 2 so the integer-order second-order system is
/// representable.
struct FracTransferFunction {
    double alpha2 = 0.0;
    double alpha1 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
    double b0 = 0.0;

    /// Throws std::invalid_argument on an invariant violation.
    static FracTransferFunction make(double alpha2, double alpha1, double a1, double a0, double b0);

    /// Parameter vector in table order (alpha2, alpha1, a1, a0, b0).
    static std::optional<FracTransferFunction> from_vector(const std::array<double, 5>& x);
    std::array<double, 5> to_vector() const { return {alpha2, alpha1, a1, a0, b0}; }

    static bool valid(double alpha2, double alpha1, double a1, double a0, double b0) noexcept;
    void validate() const;

    bool operator==(const FracTransferFunction&) const = default;
};

/// Steady-state unit-step output b0 / a0.
double dc_gain(const FracTransferFunction& tf);

/// Grunwald-Letnikov weights c_0..c_n of order alpha:
/// c_0 = 1, c_j = (1 - (alpha + 1) / j) c_{j-1}.
std::vector<double> gl_weights(double alpha, std::size_t n);

/// Guard on the GL step size.
inline constexpr double kMaxGlStep = 0.05;

/// Step response by Grunwald-Letnikov discretization of
/// D^alpha2 y + a1 D^alpha1 y + a0 y = b0 u with zero history and
/// u = input_amplitude for t >= 0. Each step solves one scalar linear equation.
/// The returned trace is normalized (setpoint 1) with trial_id "gl".
StepTrace simulate_gl(const FracTransferFunction& tf, double input_amplitude, const SimGrid& grid);

/// Raw GL solution values y_0..y_{n_points-1} at spacing step.
std::vector<double> gl_solve(const FracTransferFunction& tf, double input_amplitude, double step,
                             std::size_t n_points);

struct SeriesOptions {
    int outer_cap = 80;
    /// Outer sum stops after three consecutive terms below this magnitude.
    double outer_term_tol = 1e-12;
    /// Admissible bound on the accumulated truncation + rounding error of one
    /// y(t) evaluation. Exceeding it counts as non-convergence.
    double error_tol = 1e-7;
    MLOptions inner{.quad_fallback = false};
};

struct SeriesPoint {
    double value = 0.0;
    bool converged = false;
    int outer_terms = 0;
    double error_estimate = 0.0;
};

/// Evaluates the Mittag-Leffler series solution of the unit-step response,
///   y(t) = b0 sum_k (-a1)^k t^{dk+alpha2} E^{k+1}_{alpha2, dk+alpha2+1}(-a0 t^alpha2),
/// d = alpha2 - alpha1, obtained by expanding 1/(s (s^alpha2 + a1 s^alpha1 + a0))
/// in powers of a1 and inverting term by term with
///   L{t^{b-1} E^g_{a,b}(-c t^a)} = s^{ag-b} / (s^a + c)^g.
/// For alpha2 = 2, alpha1 = 1 it reduces to the classical second-order response.
/// The inner Mittag-Leffler kernels are built on first use and cached, so an
/// instance must not be shared between threads.
class SeriesStepEvaluator {
public:
    explicit SeriesStepEvaluator(const FracTransferFunction& tf, SeriesOptions options = {});

    SeriesPoint evaluate(double t);

    const FracTransferFunction& transfer_function() const noexcept { return tf_; }

private:
    const MittagLeffler& kernel(int k);

    FracTransferFunction tf_;
    SeriesOptions options_;
    std::vector<MittagLeffler> kernels_;
};

/// y(t) from the series alone. Throws ConvergenceError (carrying the last
/// partial sum) when either the outer or an inner sum fails to converge.
double step_response_series(const FracTransferFunction& tf, double t,
                            const SeriesOptions& options = {});

enum class EvalPath : std::uint8_t { Series, GrunwaldLetnikov };

struct StepResponseOptions {
    SeriesOptions series{};
    /// Step of the GL fallback grid.
    double gl_step = 1e-3;
    /// When false every point is served by GL.
    bool use_series = true;
};

struct StepResponse {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<EvalPath> paths;

    std::size_t series_count() const;
    std::size_t gl_count() const;
};

/// Unit-step response at arbitrary non-negative times. Each point uses the
/// series where it converges and the GL simulation otherwise; paths records
/// which one served it.
StepResponse step_response(const FracTransferFunction& tf, std::span<const double> times,
                           const StepResponseOptions& options = {});
StepResponse step_response(const FracTransferFunction& tf, const SimGrid& grid,
                           const StepResponseOptions& options = {});

/// b0 / ((j w)^alpha2 + a1 (j w)^alpha1 + a0), principal branch.
std::complex<double> freq_response(const FracTransferFunction& tf, double omega);

/// Time of the last exit from the +-band * |final_value| band around
/// final_value (the sample after the last violation). Zero if the trace
/// never leaves the band; nullopt if it is still outside at the end.
std::optional<double> settling_time(std::span<const double> times, std::span<const double> values,
                                    double final_value, double band = 0.02);

}  // namespace fracfit
