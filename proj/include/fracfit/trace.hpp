#pragma once

#include <string>
#include <vector>

namespace fracfit {

/// One sampled step response. Raw traces carry degrees; normalized traces
/// carry values divided by the setpoint.
class StepTrace {
public:
    StepTrace() = default;

    /// Throws std::invalid_argument unless times are strictly increasing,
    /// sizes match, and (for raw traces) setpoint > 0.
    StepTrace(std::vector<double> times, std::vector<double> values, double setpoint,
              std::string trial_id, bool normalized = false);

    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& values() const noexcept { return values_; }
    double setpoint() const noexcept { return setpoint_; }
    const std::string& trial_id() const noexcept { return trial_id_; }
    bool normalized() const noexcept { return normalized_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

    double front_time() const { return times_.front(); }
    double back_time() const { return times_.back(); }

    bool operator==(const StepTrace&) const = default;

private:
    std::vector<double> times_;
    std::vector<double> values_;
    double setpoint_ = 1.0;
    std::string trial_id_;
    bool normalized_ = false;
};

/// Traces of one material or prototype. Non-empty, uniform normalization.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<StepTrace> traces, std::string material, std::string notes = {});

    const std::vector<StepTrace>& traces() const noexcept { return traces_; }
    const std::string& material() const noexcept { return material_; }
    const std::string& notes() const noexcept { return notes_; }
    bool normalized() const { return traces_.front().normalized(); }
    std::size_t size() const noexcept { return traces_.size(); }
    std::size_t total_points() const noexcept;

    bool operator==(const Dataset&) const = default;

private:
    std::vector<StepTrace> traces_;
    std::string material_;
    std::string notes_;
};

}  // namespace fracfit
