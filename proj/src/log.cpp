#include "fracfit/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace fracfit {

namespace {

LogLevel level_from_env() {
    const char* env = std::getenv("FRACFIT_LOG");
    if (env == nullptr) {
        return LogLevel::Warn;
    }
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

std::atomic<int>& threshold() {
    static std::atomic<int> value{static_cast<int>(level_from_env())};
    return value;
}

constexpr const char* kNames[] = {"error", "warning", "info", "debug"};

}  // namespace

LogLevel log_threshold() { return static_cast<LogLevel>(threshold().load()); }

void set_log_threshold(LogLevel level) { threshold().store(static_cast<int>(level)); }

void log_message(LogLevel level, std::string_view message) {
    if (static_cast<int>(level) > threshold().load()) {
        return;
    }
    static std::mutex mutex;
    const std::lock_guard lock(mutex);
    std::cerr << kNames[static_cast<int>(level)] << ": " << message << '\n';
}

}  // namespace fracfit
