#pragma once

#include <string_view>

namespace fracfit {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

/// Threshold from FRACFIT_LOG (error|warn|info|debug), read once; default warn.
LogLevel log_threshold();
void set_log_threshold(LogLevel level);

/// One line on stderr, prefixed with the level, if level passes the threshold.
void log_message(LogLevel level, std::string_view message);

}  // namespace fracfit
