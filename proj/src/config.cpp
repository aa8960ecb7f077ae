#include "gotube/config.hpp"

#include "gotube/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <sstream>
#include <thread>

namespace gotube {

using json = nlohmann::json;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "system", "weights", "params", "center", "radius", "time-horizon", "dt",
      "mu", "gamma", "batch", "max-samples", "seed", "threads", "abs-tol",
      "rel-tol", "stats-m", "stats-n", "out-dir", "plot-data"};
  return keys;
}

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
  if (!doc.contains(key)) return;
  try {
    out = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

void apply_json(const json& doc, RunOptions& opts) {
  if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& item : doc.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end()) {
      throw ConfigError(item.key(), "unknown configuration key");
    }
  }
  read_field(doc, "system", opts.system);
  read_field(doc, "weights", opts.weights);
  read_field(doc, "params", opts.params);
  read_field(doc, "center", opts.center);
  read_field(doc, "radius", opts.radius);
  read_field(doc, "time-horizon", opts.time_horizon);
  read_field(doc, "dt", opts.dt);
  read_field(doc, "mu", opts.mu);
  read_field(doc, "gamma", opts.gamma);
  read_field(doc, "batch", opts.batch);
  read_field(doc, "max-samples", opts.max_samples);
  read_field(doc, "seed", opts.seed);
  read_field(doc, "threads", opts.threads);
  read_field(doc, "abs-tol", opts.abs_tol);
  read_field(doc, "rel-tol", opts.rel_tol);
  read_field(doc, "stats-m", opts.stats_m);
  read_field(doc, "stats-n", opts.stats_n);
  read_field(doc, "out-dir", opts.out_dir);
  read_field(doc, "plot-data", opts.plot_data);
}

std::vector<double> parse_csv_list(const std::string& text, const std::string& field) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, "cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw ConfigError(field, "empty list");
  return values;
}

}  // namespace

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string RunOptions::to_json() const {
  json doc;
  doc["system"] = system;
  doc["weights"] = weights;
  doc["params"] = params;
  doc["center"] = center;
  doc["radius"] = radius;
  doc["time-horizon"] = time_horizon;
  doc["dt"] = dt;
  doc["mu"] = mu;
  doc["gamma"] = gamma;
  doc["batch"] = batch;
  doc["max-samples"] = max_samples;
  doc["seed"] = seed;
  doc["threads"] = threads;
  doc["abs-tol"] = abs_tol;
  doc["rel-tol"] = rel_tol;
  doc["stats-m"] = stats_m;
  doc["stats-n"] = stats_n;
  doc["out-dir"] = out_dir;
  doc["plot-data"] = plot_data;
  return doc.dump(2);
}

RunOptions RunOptions::from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  RunOptions opts;
  apply_json(doc, opts);
  return opts;
}

GoTubeConfig RunOptions::resolve() const {
  GoTubeConfig cfg;
  if (!weights.empty()) {
    if (system != "ctrnn") throw ConfigError("weights", "weight files require --system ctrnn");
    if (!params.empty()) throw ConfigError("params", "weight-file systems take no parameters");
    cfg.system = std::make_shared<const SystemSpec>(load_system(weights));
  } else {
    cfg.system = std::make_shared<const SystemSpec>(load_system(system, params));
  }
  const int n = cfg.system->dimension();
  if (center.empty()) {
    cfg.center = cfg.system->default_center();
  } else {
    if (static_cast<int>(center.size()) != n) {
      throw ConfigError("center", "expected " + std::to_string(n) + " coordinates, got " +
                                      std::to_string(center.size()));
    }
    cfg.center = Eigen::Map<const Vector>(center.data(), n);
  }
  cfg.radius = radius;
  cfg.times = uniform_grid(time_horizon, dt);
  cfg.mu = mu;
  cfg.gamma = gamma;
  cfg.batch = batch;
  cfg.max_samples = max_samples;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.tolerances = {abs_tol, rel_tol};
  cfg.stats_pairs = stats_m;
  cfg.stats_reps = stats_n;
  cfg.stats_reps_max = std::max(cfg.stats_reps_max, stats_n);
  cfg.validate();
  return cfg;
}

RunOptions parse_run_options(const std::vector<std::string>& args) {
  CLI::App app{"gotube run"};
  app.allow_extras(false);
  std::optional<std::string> config_path, system, weights, center, out_dir;
  std::optional<double> radius, horizon, dt, mu, gamma, abs_tol, rel_tol;
  std::optional<std::size_t> batch, max_samples, stats_m, stats_n;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> params;
  bool plot_data = false;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--system", system, "registry name (vanderpol, brusselator, ...)");
  app.add_option("--weights", weights, "CT-RNN weight file");
  app.add_option("--param", params, "system parameter override key=value")->allow_extra_args(false);
  app.add_option("--center", center, "comma-separated center coordinates");
  app.add_option("--radius", radius, "initial ball radius");
  app.add_option("--time-horizon", horizon, "final time T");
  app.add_option("--dt", dt, "timestep");
  app.add_option("--mu", mu, "tightness factor (> 1)");
  app.add_option("--gamma", gamma, "error probability in (0, 1)");
  app.add_option("--batch", batch, "samples per batch");
  app.add_option("--max-samples", max_samples, "sample budget (0: 200 * batch)");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--abs-tol", abs_tol, "solver absolute tolerance");
  app.add_option("--rel-tol", rel_tol, "solver relative tolerance");
  app.add_option("--stats-m", stats_m, "pairs per difference-quotient maximum");
  app.add_option("--stats-n", stats_n, "initial number of maxima for the GEV fit");
  app.add_option("--out-dir", out_dir, "artifact directory");
  app.add_flag("--plot-data", plot_data, "also write per-dimension envelopes");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw ConfigError("arguments", e.what());
  }

  RunOptions opts;
  opts.threads = default_threads();
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("config", "cannot read " + *config_path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
      doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
      throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    apply_json(doc, opts);
  }
  if (system) opts.system = *system;
  if (weights) {
    opts.weights = *weights;
    if (!system) opts.system = "ctrnn";
  }
  for (const auto& kv : params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("param", "expected key=value, got '" + kv + "'");
    opts.params[kv.substr(0, eq)] = parse_csv_list(kv.substr(eq + 1), "param").front();
  }
  if (center) opts.center = parse_csv_list(*center, "center");
  if (radius) opts.radius = *radius;
  if (horizon) opts.time_horizon = *horizon;
  if (dt) opts.dt = *dt;
  if (mu) opts.mu = *mu;
  if (gamma) opts.gamma = *gamma;
  if (batch) opts.batch = *batch;
  if (max_samples) opts.max_samples = *max_samples;
  if (seed) opts.seed = *seed;
  if (threads) opts.threads = *threads;
  if (abs_tol) opts.abs_tol = *abs_tol;
  if (rel_tol) opts.rel_tol = *rel_tol;
  if (stats_m) opts.stats_m = *stats_m;
  if (stats_n) opts.stats_n = *stats_n;
  if (out_dir) opts.out_dir = *out_dir;
  if (plot_data) opts.plot_data = true;

  if (!(opts.mu > 1.0)) throw ConfigError("mu", "must be > 1");
  if (!(opts.gamma > 0.0 && opts.gamma < 1.0)) throw ConfigError("gamma", "must lie in (0, 1)");
  uniform_grid(opts.time_horizon, opts.dt);
  if (opts.batch < 1) throw ConfigError("batch", "must be >= 1");
  if (opts.threads < 1) throw ConfigError("threads", "must be >= 1");
  return opts;
}

}  // namespace gotube
