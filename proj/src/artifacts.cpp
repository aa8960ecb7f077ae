#include "gotube/artifacts.hpp"

#include "gotube/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gotube {

using json = nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string tube_csv(const BoundingTube& tube) {
  const int n = tube.config.system ? tube.config.system->dimension()
                                   : static_cast<int>(tube.config.center.size());
  std::string out = "t,radius,coverage,n_samples";
  for (int i = 1; i <= n; ++i) out += ",c_" + std::to_string(i);
  out += '\n';
  for (const auto& ball : tube.balls) {
    out += format_double(ball.time) + ',' + format_double(ball.radius) + ',' +
           format_double(ball.coverage) + ',' + std::to_string(ball.samples);
    for (Eigen::Index i = 0; i < ball.center.size(); ++i) out += ',' + format_double(ball.center[i]);
    out += '\n';
  }
  return out;
}

std::vector<TubeRow> parse_tube_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,radius,coverage,n_samples", 0) != 0) {
    throw ContractViolation("tube CSV: missing or wrong header");
  }
  std::size_t columns = 1;
  for (char c : line) columns += c == ',';
  if (columns < 5) throw ContractViolation("tube CSV: header has no center columns");
  std::vector<TubeRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != columns) {
      throw ContractViolation("tube CSV: line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(columns));
    }
    try {
      TubeRow row;
      row.time = std::stod(cells[0]);
      row.radius = std::stod(cells[1]);
      row.coverage = std::stod(cells[2]);
      row.samples = static_cast<std::size_t>(std::stoull(cells[3]));
      for (std::size_t i = 4; i < cells.size(); ++i) row.center.push_back(std::stod(cells[i]));
      rows.push_back(std::move(row));
    } catch (const std::exception&) {
      throw ContractViolation("tube CSV: unparsable number on line " + std::to_string(line_no));
    }
  }
  return rows;
}

std::string plot_data_csv(const BoundingTube& tube) {
  const int n = static_cast<int>(tube.config.center.size());
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",lo_" + std::to_string(i) + ",hi_" + std::to_string(i);
  out += '\n';
  for (const auto& ball : tube.balls) {
    out += format_double(ball.time);
    for (Eigen::Index i = 0; i < ball.center.size(); ++i) {
      out += ',' + format_double(ball.center[i] - ball.radius) + ',' +
             format_double(ball.center[i] + ball.radius);
    }
    out += '\n';
  }
  return out;
}

std::string metrics_json(const BoundingTube& tube) {
  json doc;
  doc["dimension"] = tube.config.center.size();
  doc["steps"] = tube.balls.size();
  if (tube.balls.empty()) {
    doc["average_volume"] = nullptr;
    doc["max_radius"] = nullptr;
    doc["volumes"] = json::array();
    doc["radii"] = json::array();
    doc["times"] = json::array();
  } else {
    const TubeMetrics m = tube_metrics(tube);
    doc["average_volume"] = m.average_volume;
    doc["max_radius"] = m.max_radius;
    doc["volumes"] = m.volumes;
    doc["radii"] = m.radii;
    std::vector<double> times;
    for (const auto& b : tube.balls) times.push_back(b.time);
    doc["times"] = times;
  }
  std::size_t total = tube.balls.empty() ? 0 : tube.balls.back().samples;
  doc["total_samples"] = total;
  return doc.dump(2);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractViolation("cannot read " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return buf;
}

std::string manifest_json(const BoundingTube& tube, const RunOptions& options, bool partial,
                          const std::string& status) {
  json doc;
  doc["version"] = GOTUBE_VERSION;
  doc["config"] = json::parse(options.to_json());
  json system;
  if (tube.config.system) {
    system["name"] = tube.config.system->name();
    system["dimension"] = tube.config.system->dimension();
    system["parameters"] = tube.config.system->parameters();
  } else {
    system["name"] = options.system;
  }
  system["weights_path"] = options.weights;
  system["weights_hash"] = options.weights.empty() ? "" : file_digest(options.weights);
  doc["system"] = system;
  std::vector<double> maxima;
  for (const auto& b : tube.balls) maxima.push_back(b.max_distance);
  doc["max_distances"] = maxima;
  doc["partial"] = partial;
  doc["status"] = status;
  doc["runtime_seconds"] = tube.runtime_seconds;
  json artifacts;
  artifacts["tube"] = "tube.csv";
  artifacts["metrics"] = "metrics.json";
  if (options.plot_data) artifacts["plot_data"] = "plot_data.csv";
  doc["artifacts"] = artifacts;
  return doc.dump(2);
}

ManifestInfo parse_manifest(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ContractViolation(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("config")) throw ContractViolation("manifest: missing config");
  ManifestInfo info;
  info.options = RunOptions::from_json(doc["config"].dump());
  try {
    info.partial = doc.value("partial", false);
    info.status = doc.value("status", std::string("ok"));
    if (doc.contains("max_distances")) info.max_distances = doc["max_distances"].get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("manifest: ") + e.what());
  }
  return info;
}

std::string containment_json(const ContainmentReport& report, double gamma) {
  json doc;
  doc["requested"] = report.requested;
  doc["trajectories"] = report.trajectories;
  doc["excluded"] = report.excluded;
  doc["gamma"] = gamma;
  doc["max_violation_rate"] = report.max_violation_rate;
  doc["passed"] = report.max_violation_rate <= gamma;
  json steps = json::array();
  for (const auto& s : report.steps) {
    steps.push_back({{"t", s.time},
                     {"trajectories", s.trajectories},
                     {"violations", s.violations},
                     {"violation_rate", s.violation_rate},
                     {"worst_ratio", s.worst_ratio}});
  }
  doc["steps"] = steps;
  return doc.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContractViolation("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ContractViolation("cannot write " + path);
  out << text;
  if (!out) throw ContractViolation("failed writing " + path);
}

}  // namespace gotube
