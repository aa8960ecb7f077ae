#pragma once

#include "gotube/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gotube {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitBudget = 3,
  kExitBlowup = 4,
  kExitAuditFailed = 5,
};

/// Runs the tube construction and writes tube.csv, metrics.json,
/// manifest.json (and plot_data.csv) into `options.out_dir`.
int cmd_run(const RunOptions& options);

struct AuditOptions {
  std::string tube;  // tube.csv path or the run directory
  std::size_t count = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;  // defaults to audit.json beside the tube
};

/// Audits a written tube with fresh trajectories; writes the containment
/// report JSON. Exit 0 when every step's violation rate is <= gamma.
int cmd_audit(const AuditOptions& options);

/// Entry point shared by the executable: `gotube run ...` / `gotube audit ...`.
int cli_main(const std::vector<std::string>& args);

}  // namespace gotube
