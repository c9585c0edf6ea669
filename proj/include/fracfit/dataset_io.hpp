#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracfit/fode.hpp"
#include "fracfit/grid.hpp"
#include "fracfit/trace.hpp"

namespace fracfit {

/// Exact CSV header of every dataset file.
inline constexpr std::string_view kCsvHeader = "trial_id,t_s,theta_deg,setpoint_deg";

/// Parses dataset CSV text. One trace per distinct trial_id (in order of
/// first appearance), rows sorted by time within a trial, raw values.
Dataset parse_csv(std::string_view text, const std::string& material = "dataset");

/// Reads a dataset file; the material label defaults to the file stem.
Dataset load_csv(const std::filesystem::path& path);

/// Serializes with 17 significant digits, LF endings. Normalized datasets are
/// written back in degrees (value * setpoint).
std::string to_csv(const Dataset& ds);
void export_csv(const Dataset& ds, const std::filesystem::path& path);

/// Loads a single CSV file, or every *.csv in a directory (sorted by name).
std::vector<Dataset> load_data_path(const std::filesystem::path& path);

/// Divides every value by its trace's setpoint. Throws NormalizationError if
/// the dataset is already normalized.
Dataset normalize(const Dataset& ds);
StepTrace normalize(const StepTrace& trace);

/// Linear interpolation of one trace onto new sample times. Throws
/// ExtrapolationError outside the trace's span.
StepTrace resample(const StepTrace& trace, std::span<const double> times);

/// Every trace interpolated onto the grid, then averaged pointwise. All
/// traces must share setpoint and normalization. trial_id is "mean".
StepTrace average_traces(const Dataset& ds, const SimGrid& grid);

/// Root-mean-square difference of two traces on identical time grids.
double rmse(const StepTrace& a, const StepTrace& b);
double rmse(std::span<const double> a, std::span<const double> b);

/// 100 * rmse / setpoint, both in the same (raw) units.
double percent_of_setpoint(double rmse_value, double setpoint);
double rmse_percent(const StepTrace& a, const StepTrace& b, double setpoint);

/// The error summary reported by compare and fit.
struct ErrorMetrics {
    double rmse_deg = 0.0;
    double rmse_percent = 0.0;
    double setpoint_deg = 0.0;
};

/// Metrics of a normalized model trace against a normalized data trace,
/// expressed in degrees of the given setpoint.
ErrorMetrics error_metrics(const StepTrace& model_normalized, const StepTrace& data_normalized,
                           double setpoint);

/// n_trials copies of the unit-step response scaled by the setpoint, each
/// with i.i.d. Gaussian noise of standard deviation noise_sigma * setpoint.
/// Deterministic for a given seed.
Dataset gen_synthetic(const FracTransferFunction& tf, const SimGrid& grid, double setpoint,
                      int n_trials, double noise_sigma, std::uint64_t seed,
                      const StepResponseOptions& options = {});

}  // namespace fracfit
