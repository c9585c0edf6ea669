#include "fracfit/trace.hpp"

#include <cmath>
#include <stdexcept>

namespace fracfit {

StepTrace::StepTrace(std::vector<double> times, std::vector<double> values, double setpoint,
                     std::string trial_id, bool normalized)
    : times_(std::move(times)),
      values_(std::move(values)),
      setpoint_(setpoint),
      trial_id_(std::move(trial_id)),
      normalized_(normalized) {
    if (times_.size() != values_.size()) {
        throw std::invalid_argument("StepTrace '" + trial_id_ + "': " +
                                    std::to_string(times_.size()) + " times but " +
                                    std::to_string(values_.size()) + " values");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw std::invalid_argument("StepTrace '" + trial_id_ +
                                        "': times must be strictly increasing");
        }
    }
    if (!std::isfinite(setpoint_) || (!normalized_ && !(setpoint_ > 0.0))) {
        throw std::invalid_argument("StepTrace '" + trial_id_ + "': setpoint must be positive");
    }
}

Dataset::Dataset(std::vector<StepTrace> traces, std::string material, std::string notes)
    : traces_(std::move(traces)), material_(std::move(material)), notes_(std::move(notes)) {
    if (traces_.empty()) {
        throw std::invalid_argument("Dataset '" + material_ + "': needs at least one trace");
    }
    for (const auto& tr : traces_) {
        if (tr.normalized() != traces_.front().normalized()) {
            throw std::invalid_argument("Dataset '" + material_ +
                                        "': traces mix raw and normalized values");
        }
    }
}

std::size_t Dataset::total_points() const noexcept {
    std::size_t n = 0;
    for (const auto& tr : traces_) {
        n += tr.size();
    }
    return n;
}

}  // namespace fracfit
