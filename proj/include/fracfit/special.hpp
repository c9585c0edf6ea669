#pragma once

#include <vector>

namespace fracfit {

/// Gamma function. Stirling series after shifting the argument to >= 20,
/// evaluated in long double; reflection below 0.5. Throws PoleError at 0, -1, -2, ... and OverflowError
/// once the result leaves the double range (x > ~171.62).
double gamma_fn(double x);

/// Rising factorial gamma (gamma+1) ... (gamma+n-1); 1 when n == 0.
double pochhammer(double gamma, int n);

/// n-th term of the three-parameter Mittag-Leffler series, composed directly
/// from pochhammer() and gamma_fn(). Used for checks; the series evaluator
/// below works in extended precision instead.
double ml_series_term(double alpha, double beta, double gamma, double z, int n);

struct MLOptions {
    int term_cap = 250;
    /// A term is negligible below rel_term_tol * max(1, |partial sum|);
    /// three negligible terms in a row stop the series.
    double rel_term_tol = 1e-14;
    /// converged requires both error estimates <= tolerance * max(1, |value|).
    double tolerance = 1e-10;
    /// Re-sum in binary128 when cancellation spoils the extended-precision
    /// result. Slow; the step-response kernels switch it off.
    bool quad_fallback = true;
};

struct MLSeriesReport {
    double value = 0.0;
    int terms_used = 0;
    /// Bound on the dropped tail (geometric extrapolation of the last terms).
    double truncation_estimate = 0.0;
    /// Accumulated rounding bound: sum of |terms| times a few ulps of the
    /// extended working precision. Large when z < 0 and the series cancels.
    double rounding_estimate = 0.0;
    bool converged = false;
};

/// E^gamma_{alpha,beta}(z) with the parameters fixed and the coefficients
/// (gamma)_n / (n! Gamma(alpha n + beta)) precomputed in long double.
/// Immutable after construction; evaluate() is safe to call concurrently.
class MittagLeffler {
public:
    MittagLeffler(double alpha, double beta, double gamma, MLOptions options = {});

    MLSeriesReport evaluate(double z) const;

    /// Extended-precision pass only (no binary128 retry, no final rounding
    /// term), also returning the sum before rounding to double for callers
    /// that keep accumulating in extended precision.
    MLSeriesReport evaluate(double z, long double& extended_value) const;

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }
    double gamma() const noexcept { return gamma_; }
    const MLOptions& options() const noexcept { return options_; }

    /// Extended-precision series coefficient for term n (n < term_cap).
    long double coefficient(int n) const { return coefficients_.at(static_cast<std::size_t>(n)); }

private:
    MLSeriesReport evaluate_quad(double z) const;

    double alpha_;
    double beta_;
    double gamma_;
    MLOptions options_;
    std::vector<long double> coefficients_;
    std::vector<long double> error_ulps_;
};

/// One-shot evaluation of E^gamma_{alpha,beta}(z). Non-convergence is
/// reported through MLSeriesReport::converged, never thrown.
MLSeriesReport mittag_leffler_3p(double alpha, double beta, double gamma, double z,
                                 const MLOptions& options = {});

}  // namespace fracfit
