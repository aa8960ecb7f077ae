#pragma once

#include "gotube/engine.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gotube {

/// Command-line level run description. Every field has a materialized
/// value after parsing; `resolve()` turns it into an engine configuration.
struct RunOptions {
  std::string system = "vanderpol";
  std::string weights;  // CT-RNN weight file; empty when unused
  std::map<std::string, double> params;
  std::vector<double> center;  // empty selects the system's default center
  double radius = 0.01;
  double time_horizon = 1.0;
  double dt = 0.1;
  double mu = 1.1;
  double gamma = 0.05;
  std::size_t batch = 100;
  std::size_t max_samples = 0;  // 0 selects 200 * batch
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  std::size_t stats_m = 20;
  std::size_t stats_n = 100;
  std::string out_dir = "gotube_out";
  bool plot_data = false;

  bool operator==(const RunOptions&) const = default;

  /// JSON object keyed by the long flag names (without dashes).
  std::string to_json() const;
  /// Inverse of to_json(); unknown keys and type errors raise ConfigError.
  static RunOptions from_json(const std::string& text);

  /// Loads the system and builds the grid. Throws ConfigError (and the
  /// system loader's errors) on invalid settings.
  GoTubeConfig resolve() const;
};

/// Thrown by the parser for -h/--help; what() is the usage text.
class HelpRequested : public Error {
 public:
  using Error::Error;
};

/// Parses `gotube run` arguments (without the program/subcommand names).
/// Precedence: flags > `--config <file>` > defaults. Throws ConfigError.
RunOptions parse_run_options(const std::vector<std::string>& args);

/// Default worker count (hardware concurrency, at least 1).
unsigned default_threads();

}  // namespace gotube
