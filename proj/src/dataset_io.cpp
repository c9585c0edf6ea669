#include "fracfit/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "fracfit/errors.hpp"
#include "fracfit/interp.hpp"
#include "fracfit/numfmt.hpp"

namespace fracfit {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

struct Row {
    double t;
    double theta;
};

struct TrialRows {
    std::vector<Row> rows;
    double setpoint = 0.0;
    std::size_t first_line = 0;
};

}  // namespace

Dataset parse_csv(std::string_view text, const std::string& material) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view& out) {
        if (pos >= text.size()) {
            return false;
        }
        const std::size_t nl = text.find('\n', pos);
        const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
        out = text.substr(pos, end - pos);
        if (!out.empty() && out.back() == '\r') {
            out.remove_suffix(1);
        }
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view line;
    if (!next_line(line) || trim(line).empty()) {
        throw SchemaError("dataset '" + material + "': empty file, expected header '" +
                          std::string(kCsvHeader) + "'");
    }

    constexpr std::array<std::string_view, 4> kColumns = {"trial_id", "t_s", "theta_deg",
                                                          "setpoint_deg"};
    std::array<std::size_t, 4> column_index{};
    {
        const auto header = split_fields(line);
        std::string missing;
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            auto it = std::find_if(header.begin(), header.end(),
                                   [&](std::string_view h) { return trim(h) == kColumns[c]; });
            if (it == header.end()) {
                missing += (missing.empty() ? "" : ", ") + std::string(kColumns[c]);
            } else {
                column_index[c] = static_cast<std::size_t>(it - header.begin());
            }
        }
        if (!missing.empty()) {
            throw SchemaError("dataset '" + material + "': missing columns: " + missing);
        }
    }
    const std::size_t min_fields = *std::max_element(column_index.begin(), column_index.end()) + 1;

    std::vector<std::string> order;
    std::map<std::string, TrialRows> trials;
    while (next_line(line)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() < min_fields) {
            throw ParseError("dataset '" + material + "': expected at least " +
                                 std::to_string(min_fields) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        const std::string id(trim(fields[column_index[0]]));
        if (id.empty()) {
            throw ParseError("dataset '" + material + "': empty trial_id", line_no);
        }
        const auto t = parse_double(fields[column_index[1]]);
        const auto theta = parse_double(fields[column_index[2]]);
        const auto setpoint = parse_double(fields[column_index[3]]);
        if (!t || !theta || !setpoint || !std::isfinite(*t) || !std::isfinite(*theta) ||
            !std::isfinite(*setpoint)) {
            throw ParseError("dataset '" + material + "': non-numeric or non-finite value", line_no);
        }
        auto [it, inserted] = trials.try_emplace(id);
        TrialRows& trial = it->second;
        if (inserted) {
            order.push_back(id);
            trial.setpoint = *setpoint;
            trial.first_line = line_no;
            if (!(*setpoint > 0.0)) {
                throw ParseError("dataset '" + material + "': trial '" + id +
                                     "' has non-positive setpoint",
                                 line_no);
            }
        } else if (*setpoint != trial.setpoint) {
            throw ParseError("dataset '" + material + "': trial '" + id +
                                 "' changes setpoint mid-trial",
                             line_no);
        }
        trial.rows.push_back({*t, *theta});
    }
    if (order.empty()) {
        throw SchemaError("dataset '" + material + "': header present but no data rows");
    }

    std::vector<StepTrace> traces;
    traces.reserve(order.size());
    for (const auto& id : order) {
        TrialRows& trial = trials.at(id);
        std::stable_sort(trial.rows.begin(), trial.rows.end(),
                         [](const Row& a, const Row& b) { return a.t < b.t; });
        std::vector<double> times;
        std::vector<double> values;
        times.reserve(trial.rows.size());
        values.reserve(trial.rows.size());
        for (const Row& r : trial.rows) {
            if (!times.empty() && r.t == times.back()) {
                throw MonotonicityError("dataset '" + material + "': trial '" + id +
                                        "' repeats timestamp " + format_double(r.t));
            }
            times.push_back(r.t);
            values.push_back(r.theta);
        }
        traces.emplace_back(std::move(times), std::move(values), trial.setpoint, id, false);
    }
    return Dataset(std::move(traces), material);
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open dataset file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path.stem().string());
}

std::string to_csv(const Dataset& ds) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& tr : ds.traces()) {
        if (tr.trial_id().find_first_of(",\n\r") != std::string::npos) {
            throw DataError("trial_id '" + tr.trial_id() + "' cannot be written to CSV");
        }
        const std::string setpoint = format_double(tr.setpoint());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            const double theta = tr.normalized() ? tr.values()[i] * tr.setpoint() : tr.values()[i];
            out += tr.trial_id();
            out += ',';
            out += format_double(tr.times()[i]);
            out += ',';
            out += format_double(theta);
            out += ',';
            out += setpoint;
            out += '\n';
        }
    }
    return out;
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << to_csv(ds);
}

std::vector<Dataset> load_data_path(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    std::vector<Dataset> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            throw DataError("no .csv files in " + path.string());
        }
        for (const auto& f : files) {
            out.push_back(load_csv(f));
        }
    } else if (fs::exists(path)) {
        out.push_back(load_csv(path));
    } else {
        throw DataError("data path does not exist: " + path.string());
    }
    return out;
}

StepTrace normalize(const StepTrace& trace) {
    if (trace.normalized()) {
        throw NormalizationError("trace '" + trace.trial_id() + "' is already normalized");
    }
    std::vector<double> values = trace.values();
    for (double& v : values) {
        v /= trace.setpoint();
    }
    return StepTrace(trace.times(), std::move(values), trace.setpoint(), trace.trial_id(), true);
}

Dataset normalize(const Dataset& ds) {
    if (ds.normalized()) {
        throw NormalizationError("dataset '" + ds.material() + "' is already normalized");
    }
    std::vector<StepTrace> traces;
    traces.reserve(ds.size());
    for (const auto& tr : ds.traces()) {
        traces.push_back(normalize(tr));
    }
    return Dataset(std::move(traces), ds.material(), ds.notes());
}

StepTrace resample(const StepTrace& trace, std::span<const double> times) {
    if (trace.empty()) {
        throw ExtrapolationError("trace '" + trace.trial_id() + "' is empty");
    }
    constexpr double kSlack = 1e-9;
    std::vector<double> values(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < trace.front_time() - kSlack || t > trace.back_time() + kSlack) {
            throw ExtrapolationError("time " + format_double(t) + " lies outside trace '" +
                                     trace.trial_id() + "' span [" +
                                     format_double(trace.front_time()) + ", " +
                                     format_double(trace.back_time()) + "]");
        }
        const double tc = std::clamp(t, trace.front_time(), trace.back_time());
        values[i] = linear_interp(trace.times(), trace.values(), tc);
    }
    return StepTrace(std::vector<double>(times.begin(), times.end()), std::move(values),
                     trace.setpoint(), trace.trial_id(), trace.normalized());
}

StepTrace average_traces(const Dataset& ds, const SimGrid& grid) {
    const std::vector<double> times = grid.times();
    const double setpoint = ds.traces().front().setpoint();
    std::vector<double> mean(times.size(), 0.0);
    for (const auto& tr : ds.traces()) {
        if (tr.setpoint() != setpoint) {
            throw DataError("average_traces: traces of '" + ds.material() +
                            "' have different setpoints");
        }
        const StepTrace r = resample(tr, times);
        for (std::size_t i = 0; i < mean.size(); ++i) {
            mean[i] += r.values()[i];
        }
    }
    const double n = static_cast<double>(ds.size());
    for (double& v : mean) {
        v /= n;
    }
    return StepTrace(times, std::move(mean), setpoint, "mean", ds.normalized());
}

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw GridMismatchError("rmse: sample counts differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ") or are empty");
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sse += d * d;
    }
    return std::sqrt(sse / static_cast<double>(a.size()));
}

double rmse(const StepTrace& a, const StepTrace& b) {
    if (a.times() != b.times()) {
        throw GridMismatchError("rmse: traces '" + a.trial_id() + "' and '" + b.trial_id() +
                                "' are sampled on different time grids");
    }
    return rmse(a.values(), b.values());
}

double percent_of_setpoint(double rmse_value, double setpoint) {
    if (!(setpoint > 0.0)) {
        throw std::invalid_argument("percent_of_setpoint: setpoint must be positive");
    }
    return 100.0 * rmse_value / setpoint;
}

double rmse_percent(const StepTrace& a, const StepTrace& b, double setpoint) {
    return percent_of_setpoint(rmse(a, b), setpoint);
}

ErrorMetrics error_metrics(const StepTrace& model_normalized, const StepTrace& data_normalized,
                           double setpoint) {
    const double normalized_rmse = rmse(model_normalized, data_normalized);
    ErrorMetrics m;
    m.setpoint_deg = setpoint;
    m.rmse_deg = normalized_rmse * setpoint;
    m.rmse_percent = percent_of_setpoint(m.rmse_deg, setpoint);
    return m;
}

Dataset gen_synthetic(const FracTransferFunction& tf, const SimGrid& grid, double setpoint,
                      int n_trials, double noise_sigma, std::uint64_t seed,
                      const StepResponseOptions& options) {
    tf.validate();
    if (n_trials < 1) {
        throw std::invalid_argument("gen_synthetic: n_trials must be >= 1");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw std::invalid_argument("gen_synthetic: noise_sigma must be >= 0");
    }
    if (!(setpoint > 0.0)) {
        throw std::invalid_argument("gen_synthetic: setpoint must be positive");
    }
    const StepResponse response = step_response(tf, grid, options);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = noise_sigma * setpoint;

    std::vector<StepTrace> traces;
    traces.reserve(static_cast<std::size_t>(n_trials));
    for (int trial = 0; trial < n_trials; ++trial) {
        std::vector<double> values(response.values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            values[i] = response.values[i] * setpoint;
            if (sigma > 0.0) {
                values[i] += sigma * noise(rng);
            }
        }
        traces.emplace_back(response.times, std::move(values), setpoint,
                            "trial_" + std::to_string(trial + 1), false);
    }
    return Dataset(std::move(traces), "synthetic",
                   "generated: noise_sigma=" + format_double(noise_sigma) +
                       " seed=" + std::to_string(seed));
}

}  // namespace fracfit
