#include "advforge/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace advforge {

namespace {

LogLevel level_from_env() {
  const char* raw = std::getenv("GAF_ADVFORGE_LOG");
  if (!raw) return LogLevel::Warn;
  if (!std::strcmp(raw, "debug")) return LogLevel::Debug;
  if (!std::strcmp(raw, "info")) return LogLevel::Info;
  if (!std::strcmp(raw, "warn")) return LogLevel::Warn;
  if (!std::strcmp(raw, "error")) return LogLevel::Error;
  if (!std::strcmp(raw, "off")) return LogLevel::Off;
  return LogLevel::Warn;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> level{int(level_from_env())};
  return level;
}

const char* level_tag(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: return "off";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return LogLevel(level_slot().load(std::memory_order_relaxed)); }

void set_log_level(LogLevel level) {
  level_slot().store(int(level), std::memory_order_relaxed);
}

void log(LogLevel level, const std::string& message) {
  if (int(level) < int(log_level()) || level == LogLevel::Off) return;
  std::fprintf(stderr, "[%s] %s\n", level_tag(level), message.c_str());
}

void log_debug(const std::string& message) { log(LogLevel::Debug, message); }
void log_info(const std::string& message) { log(LogLevel::Info, message); }
void log_warn(const std::string& message) { log(LogLevel::Warn, message); }
void log_error(const std::string& message) { log(LogLevel::Error, message); }

}  // namespace advforge
