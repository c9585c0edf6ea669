#include "fracfit/special.hpp"

#include <array>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <quadmath.h>

#include "fracfit/errors.hpp"

namespace fracfit {

namespace {

// Largest argument with a finite double Gamma.
constexpr double kGammaMaxArg = 171.624376956302725;

// sin(pi x) with exact argument reduction, so reflection keeps full accuracy
// near the negative integers.
double sin_pi(double x) {
    const double n = std::nearbyint(x);
    const double r = x - n;  // exact, |r| <= 0.5
    const double s = std::sin(std::numbers::pi * r);
    return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

constexpr long double kStirling[] = {
    1.0L / 12,   -1.0L / 360,      1.0L / 1260, -1.0L / 1680,
    1.0L / 1188, -691.0L / 360360, 1.0L / 156,  -3617.0L / 122400,
};

// ln Gamma(x + m) by the Stirling series, where m >= 0 is the smallest shift
// with x + m >= 20; shift_product receives x (x+1) ... (x+m-1). With eight
// correction terms the truncation error at 20 is below 1e-24. x >= 0.5.
long double log_gamma_shifted(long double x, long double& shift_product, long double& shifted) {
    static const long double kHalfLog2Pi = 0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    shift_product = 1.0L;
    while (x < 20.0L) {
        shift_product *= x;
        x += 1.0L;
    }
    shifted = x;
    const long double inv = 1.0L / x;
    const long double inv2 = inv * inv;
    long double correction = kStirling[7];
    for (int k = 6; k >= 0; --k) {
        correction = correction * inv2 + kStirling[k];
    }
    correction *= inv;
    return (x - 0.5L) * std::log(x) - x + kHalfLog2Pi + correction;
}

// Gamma(x) for 0.5 <= x <= kGammaMaxArg, evaluated in long double.
double gamma_positive(double x) {
    long double shift_product = 1.0L;
    long double shifted = 0.0L;
    const long double lg = log_gamma_shifted(x, shift_product, shifted);
    return static_cast<double>(std::exp(lg) / shift_product);
}

// 1/Gamma(x) in extended precision, about five times faster than 1/tgammal.
// The relative error grows like |ln Gamma(x)| * LDBL_EPSILON, reported
// through log_gamma_magnitude.
long double reciprocal_gamma_ld(long double x, long double& log_gamma_magnitude) {
    if (x <= 0.0L && x == std::floor(x)) {
        log_gamma_magnitude = 0.0L;
        return 0.0L;
    }
    if (x < 0.5L || x > 1700.0L) {
        const long double lg = std::lgamma(x);
        log_gamma_magnitude = std::fabs(lg) + 1.0L;
        return x < 0.5L ? 1.0L / std::tgamma(x) : std::exp(-lg);
    }
    long double shift_product = 1.0L;
    long double shifted = 0.0L;
    const long double lg = log_gamma_shifted(x, shift_product, shifted);
    log_gamma_magnitude = (shifted - 0.5L) * std::log(shifted) + shifted + 20.0L;
    return shift_product * std::exp(-lg);
}

}  // namespace

double gamma_fn(double x) {
    if (std::isnan(x)) {
        throw std::domain_error("gamma_fn: NaN argument");
    }
    if (x <= 0.0 && x == std::floor(x)) {
        throw PoleError("gamma_fn: pole at non-positive integer " + std::to_string(x));
    }
    if (x > kGammaMaxArg) {
        throw OverflowError("gamma_fn: Gamma(" + std::to_string(x) + ") exceeds double range");
    }
    if (x >= 0.5) {
        return gamma_positive(x);
    }
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    const double one_minus = 1.0 - x;
    if (one_minus > kGammaMaxArg) {
        return 0.0;  // |Gamma(x)| underflows
    }
    return std::numbers::pi / (sin_pi(x) * gamma_positive(one_minus));
}

double pochhammer(double gamma, int n) {
    if (n < 0) {
        throw std::invalid_argument("pochhammer: n must be non-negative");
    }
    double product = 1.0;
    for (int k = 0; k < n; ++k) {
        product *= gamma + static_cast<double>(k);
        if (!std::isfinite(product)) {
            throw OverflowError("pochhammer: product overflows at n = " + std::to_string(n));
        }
    }
    return product;
}

double ml_series_term(double alpha, double beta, double gamma, double z, int n) {
    return pochhammer(gamma, n) * std::pow(z, n) /
           (gamma_fn(static_cast<double>(n) + 1.0) * gamma_fn(alpha * n + beta));
}

MittagLeffler::MittagLeffler(double alpha, double beta, double gamma, MLOptions options)
    : alpha_(alpha), beta_(beta), gamma_(gamma), options_(options) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::domain_error("mittag_leffler: alpha must be positive");
    }
    if (!std::isfinite(beta) || !std::isfinite(gamma)) {
        throw std::domain_error("mittag_leffler: beta and gamma must be finite");
    }
    if (options_.term_cap < 1) {
        throw std::invalid_argument("mittag_leffler: term_cap must be >= 1");
    }
    coefficients_.resize(static_cast<std::size_t>(options_.term_cap));
    error_ulps_.resize(static_cast<std::size_t>(options_.term_cap));
    // (gamma)_n / n! accumulated as a running product.
    long double rising_over_factorial = 1.0L;
    for (int n = 0; n < options_.term_cap; ++n) {
        if (n > 0) {
            rising_over_factorial *=
                (static_cast<long double>(gamma) + (n - 1)) / static_cast<long double>(n);
        }
        const long double arg =
            static_cast<long double>(alpha) * n + static_cast<long double>(beta);
        long double log_gamma_magnitude = 0.0L;
        coefficients_[static_cast<std::size_t>(n)] =
            rising_over_factorial * reciprocal_gamma_ld(arg, log_gamma_magnitude);
        // Rounding of the running product plus the reciprocal Gamma, in ulps.
        error_ulps_[static_cast<std::size_t>(n)] = 2.0L * n + 4.0L + log_gamma_magnitude;
    }
}

MLSeriesReport MittagLeffler::evaluate(double z) const {
    long double unused = 0.0L;
    MLSeriesReport report = evaluate(z, unused);
    if (!report.converged && options_.quad_fallback && report.terms_used < options_.term_cap) {
        const double bound = options_.tolerance * std::max(1.0, std::fabs(report.value));
        if (report.truncation_estimate <= bound) {
            report = evaluate_quad(z);
        }
    }
    // Final rounding to double.
    const double mag = std::fabs(report.value);
    report.rounding_estimate += 0.5 * (std::nextafter(mag, HUGE_VAL) - mag);
    return report;
}

MLSeriesReport MittagLeffler::evaluate_quad(double z) const {
    using Quad = __float128;
    const Quad zq = z;
    const Quad eps = FLT128_EPSILON;
    Quad sum = 0;
    Quad rounding = 0;
    Quad rising_over_factorial = 1;
    Quad z_power = 1;
    Quad prev2_abs = 0;
    Quad prev_abs = 0;
    Quad last_abs = 0;
    int negligible_run = 0;
    int used = 0;
    bool stopped = false;
    for (int n = 0; n < options_.term_cap; ++n) {
        if (n > 0) {
            rising_over_factorial *= (static_cast<Quad>(gamma_) + (n - 1)) / n;
            z_power *= zq;
        }
        const Quad arg = static_cast<Quad>(alpha_) * n + static_cast<Quad>(beta_);
        Quad reciprocal = 0;
        Quad log_gamma_magnitude = 1;
        if (!(arg <= 0 && arg == floorq(arg))) {
            reciprocal = 1 / tgammaq(arg);
            log_gamma_magnitude = fabsq(lgammaq(arg)) + 1;
        }
        const Quad term = rising_over_factorial * reciprocal * z_power;
        sum += term;
        ++used;
        const Quad abs_term = fabsq(term);
        rounding += abs_term * (2 * n + 8 + log_gamma_magnitude) * eps;
        prev2_abs = prev_abs;
        prev_abs = last_abs;
        last_abs = abs_term;
        const Quad scale = fmaxq(1, fabsq(sum));
        const bool past_poles = arg > 0;
        const bool decreasing = n == 0 || abs_term <= prev_abs;
        if (past_poles && decreasing && abs_term < options_.rel_term_tol * scale) {
            if (++negligible_run == 3) {
                stopped = true;
                break;
            }
        } else {
            negligible_run = 0;
        }
    }
    Quad tail = 0;
    if (last_abs != 0) {
        Quad ratio = prev_abs > 0 ? last_abs / prev_abs : 1;
        if (prev2_abs > 0) {
            ratio = fmaxq(ratio, prev_abs / prev2_abs);
        }
        tail = ratio < 1 ? last_abs * ratio / (1 - ratio) : static_cast<Quad>(HUGE_VAL);
    }
    if (!stopped) {
        tail = fmaxq(tail, last_abs);
    }
    MLSeriesReport report;
    report.value = static_cast<double>(sum);
    report.terms_used = used;
    report.truncation_estimate = static_cast<double>(tail);
    report.rounding_estimate = static_cast<double>(rounding);
    const double bound = options_.tolerance * std::max(1.0, std::fabs(report.value));
    report.converged = stopped && report.truncation_estimate <= bound &&
                       report.rounding_estimate <= bound;
    return report;
}

MLSeriesReport MittagLeffler::evaluate(double z, long double& extended_value) const {
    if (!std::isfinite(z)) {
        throw std::domain_error("mittag_leffler: z must be finite");
    }
    const long double zl = z;
    const long double eps = LDBL_EPSILON;

    long double sum = 0.0L;
    long double compensation = 0.0L;
    long double rounding = 0.0L;
    long double z_power = 1.0L;
    long double prev2_abs = 0.0L;
    long double prev_abs = 0.0L;
    long double last_abs = 0.0L;
    int negligible_run = 0;
    int used = 0;
    bool stopped = false;

    for (int n = 0; n < options_.term_cap; ++n) {
        const long double term = coefficients_[static_cast<std::size_t>(n)] * z_power;
        // Kahan-Babuska summation.
        const long double y = term - compensation;
        const long double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
        ++used;

        const long double abs_term = std::fabs(term);
        rounding += abs_term * (error_ulps_[static_cast<std::size_t>(n)] + 4.0L) * eps;
        prev2_abs = prev_abs;
        prev_abs = last_abs;
        last_abs = abs_term;

        // Negligible terms only count once the series is past its peak: for
        // large gamma the leading terms are tiny and the bulk comes later.
        const long double scale = std::max(1.0L, std::fabs(sum));
        const bool past_poles = static_cast<long double>(alpha_) * n + beta_ > 0.0L;
        const bool decreasing = n == 0 || abs_term <= prev_abs;
        if (past_poles && decreasing && abs_term < options_.rel_term_tol * scale) {
            if (++negligible_run == 3) {
                stopped = true;
                break;
            }
        } else {
            negligible_run = 0;
        }
        z_power *= zl;
    }

    MLSeriesReport report;
    extended_value = sum;
    report.value = static_cast<double>(sum);
    report.terms_used = used;
    report.rounding_estimate = static_cast<double>(rounding);

    long double tail;
    if (last_abs == 0.0L) {
        tail = 0.0L;
    } else if (prev_abs == 0.0L) {
        tail = HUGE_VALL;
    } else {
        // The larger of the last two ratios: for alpha = 1/2 odd and even
        // terms decay at different rates.
        long double ratio = last_abs / prev_abs;
        if (prev2_abs > 0.0L) {
            ratio = std::max(ratio, prev_abs / prev2_abs);
        }
        tail = ratio < 1.0L ? last_abs * ratio / (1.0L - ratio) : HUGE_VALL;
    }
    if (!stopped) {
        // Cap hit: the tail is at least as large as the last term.
        tail = std::max(tail, last_abs);
    }
    report.truncation_estimate = static_cast<double>(tail);

    const double bound = options_.tolerance * std::max(1.0, std::fabs(report.value));
    report.converged = stopped && report.truncation_estimate <= bound &&
                       report.rounding_estimate <= bound;
    return report;
}

MLSeriesReport mittag_leffler_3p(double alpha, double beta, double gamma, double z,
                                 const MLOptions& options) {
    return MittagLeffler(alpha, beta, gamma, options).evaluate(z);
}

}  // namespace fracfit
