#pragma once

#include <string>

namespace advforge {

enum class LogLevel : int { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

/// Current threshold. Initialized once from the GAF_ADVFORGE_LOG environment
/// variable ("debug", "info", "warn", "error", "off"; unset or unrecognized
/// values mean Warn).
LogLevel log_level();

/// Overrides the threshold for the rest of the process.
void set_log_level(LogLevel level);

/// Writes "[level] message" to stderr when level passes the threshold.
void log(LogLevel level, const std::string& message);

void log_debug(const std::string& message);
void log_info(const std::string& message);
void log_warn(const std::string& message);
void log_error(const std::string& message);

}  // namespace advforge
