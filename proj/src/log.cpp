#include "gotube/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace gotube {

namespace {

LogLevel parse_env() {
  const char* raw = std::getenv("GOTUBE_LOG");
  if (!raw) return LogLevel::warn;
  const std::string value(raw);
  if (value == "error") return LogLevel::error;
  if (value == "info") return LogLevel::info;
  if (value == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

std::atomic<int>& threshold() {
  static std::atomic<int> level{static_cast<int>(parse_env())};
  return level;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::string_view kNames[] = {"error", "warn", "info", "debug"};

}  // namespace

LogLevel log_threshold() { return static_cast<LogLevel>(threshold().load()); }

void set_log_threshold(LogLevel level) { threshold().store(static_cast<int>(level)); }

LogLine::LogLine(LogLevel level)
    : level_(level), enabled_(static_cast<int>(level) <= threshold().load()) {}

LogLine::~LogLine() {
  if (!enabled_) return;
  std::lock_guard lock(sink_mutex());
  std::cerr << "[gotube " << kNames[static_cast<int>(level_)] << "] " << stream_.str() << '\n';
}

}  // namespace gotube
