#include "fracfit/fode.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fracfit/errors.hpp"
#include "fracfit/interp.hpp"
#include "fft.hpp"

namespace fracfit {

bool FracTransferFunction::valid(double alpha2, double alpha1, double a1, double a0,
                                 double b0) noexcept {
    const bool finite = std::isfinite(alpha2) && std::isfinite(alpha1) && std::isfinite(a1) &&
                        std::isfinite(a0) && std::isfinite(b0);
    return finite && alpha1 > 0.0 && alpha1 < alpha2 && alpha2 <= 2.0 && a0 > 0.0 && a1 >= 0.0 &&
           b0 > 0.0;
}

void FracTransferFunction::validate() const {
    if (!valid(alpha2, alpha1, a1, a0, b0)) {
        throw std::invalid_argument(
            "FracTransferFunction: require 0 < alpha1 < alpha2 <= 2, a0 > 0, a1 >= 0, b0 > 0 "
            "(got alpha2=" + std::to_string(alpha2) + ", alpha1=" + std::to_string(alpha1) +
            ", a1=" + std::to_string(a1) + ", a0=" + std::to_string(a0) +
            ", b0=" + std::to_string(b0) + ")");
    }
}

FracTransferFunction FracTransferFunction::make(double alpha2, double alpha1, double a1, double a0,
                                                double b0) {
    FracTransferFunction tf{alpha2, alpha1, a1, a0, b0};
    tf.validate();
    return tf;
}

std::optional<FracTransferFunction> FracTransferFunction::from_vector(
    const std::array<double, 5>& x) {
    if (!valid(x[0], x[1], x[2], x[3], x[4])) {
        return std::nullopt;
    }
    return FracTransferFunction{x[0], x[1], x[2], x[3], x[4]};
}

double dc_gain(const FracTransferFunction& tf) {
    tf.validate();
    return tf.b0 / tf.a0;
}

std::vector<double> gl_weights(double alpha, std::size_t n) {
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        c[j] = (1.0 - (alpha + 1.0) / static_cast<double>(j)) * c[j - 1];
    }
    return c;
}

// ---------------------------------------------------------------------------
// Grunwald-Letnikov

namespace {

// Below this weight support the memory sum is done directly (integer orders
// leave only order + 1 nonzero weights).
constexpr std::size_t kBandedSupport = 64;
// Leaf size of the divide-and-conquer convolution.
constexpr std::size_t kLeaf = 64;

// Marches y_n = (rhs - sum_{j=1..n} w_j y_{n-j}) / diag with the history sum
// split recursively: the left half of every segment is solved first, its
// contribution to the right half is added with one FFT of twice the half
// length, then the right half is solved. O(N log^2 N) instead of O(N^2).
class OnlineConvolutionMarcher {
public:
    OnlineConvolutionMarcher(std::vector<double> weights, std::size_t n_points, double diag,
                             double rhs)
        : w_(std::move(weights)), n_(n_points), diag_(diag), rhs_(rhs) {
        padded_ = kLeaf;
        while (padded_ < n_) {
            padded_ <<= 1;
        }
        w_.resize(padded_, 0.0);
        y_.assign(padded_, 0.0);
        acc_.assign(padded_, 0.0);
    }

    std::vector<double> run() {
        solve(0, padded_);
        y_.resize(n_);
        return std::move(y_);
    }

private:
    struct Level {
        detail::Fft fft;
        std::vector<std::complex<double>> weights_spectrum;
    };

    void solve(std::size_t lo, std::size_t hi) {
        if (lo >= n_) {
            return;
        }
        if (hi - lo <= kLeaf) {
            const std::size_t end = std::min(hi, n_);
            for (std::size_t n = std::max<std::size_t>(lo, 1); n < end; ++n) {
                double memory = acc_[n];
                for (std::size_t i = lo; i < n; ++i) {
                    memory += w_[n - i] * y_[i];
                }
                y_[n] = (rhs_ - memory) / diag_;
            }
            return;
        }
        const std::size_t mid = lo + (hi - lo) / 2;
        solve(lo, mid);
        if (mid < n_) {
            cross(lo, mid);
        }
        solve(mid, hi);
    }

    // acc[n] += sum_{i in [lo, mid)} w_{n-i} y_i for n in [mid, 2 mid - lo).
    // A circular convolution of length 2B is exact on the upper half.
    void cross(std::size_t lo, std::size_t mid) {
        const std::size_t half = mid - lo;
        const Level& level = level_for(2 * half);
        std::vector<std::complex<double>> buf(2 * half);
        for (std::size_t i = 0; i < half; ++i) {
            buf[i] = y_[lo + i];
        }
        level.fft.forward(buf);
        for (std::size_t k = 0; k < buf.size(); ++k) {
            const std::complex<double> a = buf[k];
            const std::complex<double> b = level.weights_spectrum[k];
            buf[k] = {a.real() * b.real() - a.imag() * b.imag(),
                      a.real() * b.imag() + a.imag() * b.real()};
        }
        level.fft.inverse(buf);
        const double scale = 1.0 / static_cast<double>(buf.size());
        const std::size_t end = std::min(n_, lo + 2 * half);
        for (std::size_t n = mid; n < end; ++n) {
            acc_[n] += buf[n - lo].real() * scale;
        }
    }

    const Level& level_for(std::size_t size) {
        auto it = levels_.find(size);
        if (it == levels_.end()) {
            Level level{detail::Fft(size), std::vector<std::complex<double>>(size)};
            for (std::size_t j = 0; j < size; ++j) {
                level.weights_spectrum[j] = w_[j];
            }
            level.fft.forward(level.weights_spectrum);
            it = levels_.emplace(size, std::move(level)).first;
        }
        return it->second;
    }

    std::vector<double> w_;
    std::size_t n_;
    double diag_;
    double rhs_;
    std::size_t padded_ = 0;
    std::vector<double> y_;
    std::vector<double> acc_;
    std::map<std::size_t, Level> levels_;
};

std::vector<double> banded_march(const std::vector<double>& w, std::size_t support,
                                 std::size_t n_points, double diag, double rhs) {
    std::vector<double> y(n_points, 0.0);
    for (std::size_t n = 1; n < n_points; ++n) {
        const std::size_t len = std::min(n, support - 1);
        double memory = 0.0;
        for (std::size_t j = 1; j <= len; ++j) {
            memory += w[j] * y[n - j];
        }
        y[n] = (rhs - memory) / diag;
    }
    return y;
}

}  // namespace

std::vector<double> gl_solve(const FracTransferFunction& tf, double input_amplitude, double step,
                             std::size_t n_points) {
    tf.validate();
    if (!(step > 0.0)) {
        throw std::invalid_argument("gl_solve: step must be positive");
    }
    if (step > kMaxGlStep) {
        throw GridTooCoarseError("simulate_gl: step " + std::to_string(step) +
                                 " s exceeds the accuracy guard of " + std::to_string(kMaxGlStep) +
                                 " s");
    }
    if (n_points < 2 || input_amplitude == 0.0) {
        return std::vector<double>(n_points, 0.0);
    }

    // Combined memory weights of both fractional terms.
    const double s2 = std::pow(step, -tf.alpha2);
    const double s1 = tf.a1 * std::pow(step, -tf.alpha1);
    const std::vector<double> c2 = gl_weights(tf.alpha2, n_points - 1);
    const std::vector<double> c1 = gl_weights(tf.alpha1, n_points - 1);
    std::vector<double> w(n_points);
    for (std::size_t j = 0; j < n_points; ++j) {
        w[j] = s2 * c2[j] + s1 * c1[j];
    }
    // Integer orders produce exactly-zero weights past order + 1.
    std::size_t support = n_points;
    while (support > 1 && w[support - 1] == 0.0) {
        --support;
    }

    const double diag = w[0] + tf.a0;
    const double rhs = tf.b0 * input_amplitude;
    if (support <= kBandedSupport) {
        return banded_march(w, support, n_points, diag, rhs);
    }
    return OnlineConvolutionMarcher(std::move(w), n_points, diag, rhs).run();
}

StepTrace simulate_gl(const FracTransferFunction& tf, double input_amplitude, const SimGrid& grid) {
    std::vector<double> values = gl_solve(tf, input_amplitude, grid.step(), grid.n_points());
    return StepTrace(grid.times(), std::move(values), 1.0, "gl", true);
}

// ---------------------------------------------------------------------------
// Series

SeriesStepEvaluator::SeriesStepEvaluator(const FracTransferFunction& tf, SeriesOptions options)
    : tf_(tf), options_(options) {
    tf_.validate();
    if (options_.outer_cap < 1) {
        throw std::invalid_argument("SeriesStepEvaluator: outer_cap must be >= 1");
    }
    kernels_.reserve(static_cast<std::size_t>(options_.outer_cap));
}

const MittagLeffler& SeriesStepEvaluator::kernel(int k) {
    const double d = tf_.alpha2 - tf_.alpha1;
    while (static_cast<int>(kernels_.size()) <= k) {
        const int kk = static_cast<int>(kernels_.size());
        kernels_.emplace_back(tf_.alpha2, d * kk + tf_.alpha2 + 1.0, kk + 1.0, options_.inner);
    }
    return kernels_[static_cast<std::size_t>(k)];
}

SeriesPoint SeriesStepEvaluator::evaluate(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("step response: t must be finite and non-negative");
    }
    SeriesPoint point;
    if (t == 0.0) {
        point.converged = true;
        return point;
    }

    const long double b0 = tf_.b0;
    const double z = -tf_.a0 * std::pow(t, tf_.alpha2);
    const long double growth =
        static_cast<long double>(tf_.a1) * std::pow(static_cast<long double>(t),
                                                    static_cast<long double>(tf_.alpha2 - tf_.alpha1));

    long double sum = 0.0L;
    long double compensation = 0.0L;
    long double error = 0.0L;
    // a1^k t^{dk + alpha2}
    long double magnitude =
        std::pow(static_cast<long double>(t), static_cast<long double>(tf_.alpha2));
    long double sign = 1.0L;
    long double prev_abs = 0.0L;
    long double last_abs = 0.0L;
    int negligible_run = 0;
    bool stopped = false;
    bool aborted = false;
    int k = 0;

    for (; k < options_.outer_cap; ++k) {
        long double inner_value = 0.0L;
        const MLSeriesReport inner = kernel(k).evaluate(z, inner_value);
        const long double term = sign * magnitude * inner_value;
        const long double y = term - compensation;
        const long double s = sum + y;
        compensation = (s - sum) - y;
        sum = s;

        error += b0 * magnitude *
                 (static_cast<long double>(inner.truncation_estimate) + inner.rounding_estimate);
        if (error > options_.error_tol) {
            aborted = true;
            ++k;
            break;
        }

        const long double abs_term = std::fabs(b0 * term);
        prev_abs = last_abs;
        last_abs = abs_term;
        if (abs_term < options_.outer_term_tol && (k == 0 || abs_term <= prev_abs)) {
            if (++negligible_run == 3) {
                stopped = true;
                ++k;
                break;
            }
        } else {
            negligible_run = 0;
        }
        magnitude *= growth;
        sign = -sign;
    }

    if (!aborted) {
        long double tail = last_abs;
        if (prev_abs > 0.0L && last_abs < prev_abs) {
            const long double ratio = last_abs / prev_abs;
            tail = last_abs * ratio / (1.0L - ratio);
        }
        error += tail;
    }

    point.value = static_cast<double>(b0 * sum);
    point.outer_terms = k;
    point.error_estimate = static_cast<double>(error);
    point.converged = stopped && !aborted && error <= options_.error_tol;
    return point;
}

double step_response_series(const FracTransferFunction& tf, double t, const SeriesOptions& options) {
    SeriesStepEvaluator evaluator(tf, options);
    const SeriesPoint point = evaluator.evaluate(t);
    if (!point.converged) {
        throw ConvergenceError("step_response_series: series did not converge at t = " +
                                   std::to_string(t) + " (error estimate " +
                                   std::to_string(point.error_estimate) + ")",
                               point.value);
    }
    return point.value;
}

// ---------------------------------------------------------------------------
// Arbitrated step response

std::size_t StepResponse::series_count() const {
    return static_cast<std::size_t>(std::count(paths.begin(), paths.end(), EvalPath::Series));
}

std::size_t StepResponse::gl_count() const { return paths.size() - series_count(); }

StepResponse step_response(const FracTransferFunction& tf, std::span<const double> times,
                           const StepResponseOptions& options) {
    tf.validate();
    StepResponse out;
    out.times.assign(times.begin(), times.end());
    out.values.assign(times.size(), 0.0);
    out.paths.assign(times.size(), EvalPath::GrunwaldLetnikov);

    std::vector<std::size_t> fallback;
    double fallback_horizon = 0.0;
    if (options.use_series) {
        SeriesStepEvaluator evaluator(tf, options.series);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const SeriesPoint point = evaluator.evaluate(times[i]);
            if (point.converged) {
                out.values[i] = point.value;
                out.paths[i] = EvalPath::Series;
            } else {
                fallback.push_back(i);
                fallback_horizon = std::max(fallback_horizon, times[i]);
            }
        }
    } else {
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(times[i] >= 0.0) || !std::isfinite(times[i])) {
                throw std::invalid_argument("step response: t must be finite and non-negative");
            }
            fallback.push_back(i);
            fallback_horizon = std::max(fallback_horizon, times[i]);
        }
    }
    if (fallback.empty()) {
        return out;
    }

    const double h = options.gl_step;
    const auto n_points = static_cast<std::size_t>(std::ceil(fallback_horizon / h - 1e-9)) + 1;
    const std::vector<double> gl = gl_solve(tf, 1.0, h, std::max<std::size_t>(n_points, 2));
    std::vector<double> gl_times(gl.size());
    for (std::size_t i = 0; i < gl.size(); ++i) {
        gl_times[i] = static_cast<double>(i) * h;
    }
    for (const std::size_t i : fallback) {
        out.values[i] = linear_interp(gl_times, gl, times[i]);
    }
    return out;
}

StepResponse step_response(const FracTransferFunction& tf, const SimGrid& grid,
                           const StepResponseOptions& options) {
    const std::vector<double> times = grid.times();
    return step_response(tf, times, options);
}

// ---------------------------------------------------------------------------

std::complex<double> freq_response(const FracTransferFunction& tf, double omega) {
    tf.validate();
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("freq_response: omega must be positive");
    }
    const std::complex<double> jw(0.0, omega);
    const std::complex<double> den = std::pow(jw, tf.alpha2) + tf.a1 * std::pow(jw, tf.alpha1) + tf.a0;
    if (std::abs(den) < 1e-14) {
        throw SingularityError("freq_response: denominator vanishes at omega = " +
                               std::to_string(omega));
    }
    return tf.b0 / den;
}

std::optional<double> settling_time(std::span<const double> times, std::span<const double> values,
                                    double final_value, double band) {
    if (times.size() != values.size() || times.empty()) {
        throw std::invalid_argument("settling_time: times and values must be non-empty and aligned");
    }
    const double tol = band * std::fabs(final_value);
    std::optional<std::size_t> last_outside;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::fabs(values[i] - final_value) > tol) {
            last_outside = i;
        }
    }
    if (!last_outside) {
        return 0.0;
    }
    if (*last_outside + 1 >= times.size()) {
        return std::nullopt;
    }
    return times[*last_outside + 1];
}

}  // namespace fracfit
