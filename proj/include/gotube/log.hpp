#pragma once

#include <sstream>
#include <string_view>

namespace gotube {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

/// Threshold from GOTUBE_LOG (error|warn|info|debug); defaults to warn.
LogLevel log_threshold();
void set_log_threshold(LogLevel level);

/// Collects one message and writes it to stderr on destruction.
class LogLine {
 public:
  explicit LogLine(LogLevel level);
  ~LogLine();
  LogLine(const LogLine&) = delete;
  LogLine& operator=(const LogLine&) = delete;

  template <typename T>
  LogLine& operator<<(const T& value) {
    if (enabled_) stream_ << value;
    return *this;
  }

 private:
  LogLevel level_;
  bool enabled_;
  std::ostringstream stream_;
};

inline LogLine log(LogLevel level) { return LogLine(level); }

}  // namespace gotube
