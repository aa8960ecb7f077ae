#include "gotube/commands.hpp"

#include "gotube/artifacts.hpp"
#include "gotube/errors.hpp"
#include "gotube/log.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace gotube {

namespace fs = std::filesystem;

namespace {

void write_run_artifacts(const BoundingTube& tube, const RunOptions& options, bool partial,
                         const std::string& status) {
  const fs::path dir(options.out_dir);
  write_text_file((dir / "tube.csv").string(), tube_csv(tube));
  write_text_file((dir / "metrics.json").string(), metrics_json(tube));
  if (options.plot_data) write_text_file((dir / "plot_data.csv").string(), plot_data_csv(tube));
  write_text_file((dir / "manifest.json").string(), manifest_json(tube, options, partial, status));
}

}  // namespace

int cmd_run(const RunOptions& options) {
  GoTubeConfig config;
  try {
    config = options.resolve();
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (ec) throw ConfigError("out-dir", "cannot create " + options.out_dir + ": " + ec.message());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnknownSystemError& e) {
    std::cerr << "config error: system: " << e.what() << '\n';
    return kExitConfig;
  } catch (const WeightFormatError& e) {
    std::cerr << "config error: weights" << e.field() << ": " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const BoundingTube tube = run_gotube(config);
    write_run_artifacts(tube, options, false, "ok");
    return kExitOk;
  } catch (const BudgetExceededError& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    write_run_artifacts(e.partial(), options, true, "budget_exceeded");
    return kExitBudget;
  } catch (const IntegrationBlowupError& e) {
    std::cerr << "integration blowup: " << e.what() << '\n';
    return kExitBlowup;
  } catch (const IntegrationDomainError& e) {
    std::cerr << "integration blowup: " << e.what() << '\n';
    return kExitBlowup;
  }
}

int cmd_audit(const AuditOptions& options) {
  if (options.count < 1) {
    std::cerr << "config error: count: must be >= 1\n";
    return kExitConfig;
  }
  fs::path tube_path(options.tube);
  if (fs::is_directory(tube_path)) tube_path /= "tube.csv";
  const fs::path dir = tube_path.parent_path();

  BoundingTube tube;
  ManifestInfo manifest;
  try {
    manifest = parse_manifest(read_text_file((dir / "manifest.json").string()));
    const auto rows = parse_tube_csv(read_text_file(tube_path.string()));
    tube.config = manifest.options.resolve();
    if (rows.size() + 1 > tube.config.times.size()) {
      throw ContractViolation("tube has more rows than the configured grid");
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto& row = rows[j];
      if (static_cast<int>(row.center.size()) != tube.config.system->dimension()) {
        throw ContractViolation("tube CSV dimension does not match the system");
      }
      BoundingBall ball;
      ball.time = row.time;
      ball.radius = row.radius;
      ball.coverage = row.coverage;
      ball.samples = row.samples;
      ball.center = Eigen::Map<const Vector>(row.center.data(), static_cast<Eigen::Index>(row.center.size()));
      ball.max_distance = j < manifest.max_distances.size() ? manifest.max_distances[j] : 0.0;
      tube.balls.push_back(std::move(ball));
    }
  } catch (const Error& e) {
    std::cerr << "audit: cannot load tube: " << e.what() << '\n';
    return kExitConfig;
  }
  if (options.seed == tube.config.seed) {
    std::cerr << "config error: seed: audit seed must differ from the tube seed\n";
    return kExitConfig;
  }
  if (tube.balls.empty()) {
    std::cerr << "audit: tube is empty\n";
    return kExitConfig;
  }

  Rng rng(options.seed);
  const ContainmentReport report = audit_tube(tube, options.count, rng, options.threads);
  const std::string out = options.out.empty() ? (dir / "audit.json").string() : options.out;
  try {
    write_text_file(out, containment_json(report, tube.config.gamma));
  } catch (const Error& e) {
    std::cerr << "audit: " << e.what() << '\n';
    return kExitConfig;
  }
  log(LogLevel::info) << "audit: " << report.trajectories << " trajectories, max violation rate "
                      << report.max_violation_rate;
  return report.max_violation_rate <= tube.config.gamma ? kExitOk : kExitAuditFailed;
}

int cli_main(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "-h" || args[0] == "--help") {
    std::cout << "usage: gotube run [options] | gotube audit --tube <path> --count N --seed S\n";
    return args.empty() ? kExitConfig : kExitOk;
  }
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (args[0] == "run") {
    RunOptions options;
    try {
      options = parse_run_options(rest);
    } catch (const HelpRequested& e) {
      std::cout << e.what();
      return kExitOk;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    return cmd_run(options);
  }
  if (args[0] == "audit") {
    CLI::App app{"gotube audit"};
    AuditOptions options;
    options.threads = default_threads();
    app.add_option("--tube", options.tube, "tube.csv or run directory")->required();
    app.add_option("--count", options.count, "fresh trajectories");
    app.add_option("--seed", options.seed, "audit seed (must differ from the run seed)");
    app.add_option("--threads", options.threads, "worker threads");
    app.add_option("--out", options.out, "report path");
    std::vector<std::string> reversed(rest.rbegin(), rest.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      std::cout << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    return cmd_audit(options);
  }
  std::cerr << "unknown command '" << args[0] << "' (expected run or audit)\n";
  return kExitConfig;
}

}  // namespace gotube
