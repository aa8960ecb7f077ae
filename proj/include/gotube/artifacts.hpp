#pragma once

#include "gotube/config.hpp"
#include "gotube/engine.hpp"
#include "gotube/oracle.hpp"

#include <string>
#include <vector>

namespace gotube {

/// One row of the tube CSV.
struct TubeRow {
  double time = 0.0;
  double radius = 0.0;
  double coverage = 0.0;
  std::size_t samples = 0;
  std::vector<double> center;
};

/// Header `t,radius,coverage,n_samples,c_1,...,c_n`; doubles with 17
/// significant digits.
std::string tube_csv(const BoundingTube& tube);
/// Parses tube CSV text. Throws ContractViolation on malformed input.
std::vector<TubeRow> parse_tube_csv(const std::string& text);

/// Envelope columns t,lo_1,hi_1,...,lo_n,hi_n (center -/+ radius).
std::string plot_data_csv(const BoundingTube& tube);

std::string metrics_json(const BoundingTube& tube);

struct ManifestInfo {
  RunOptions options;
  bool partial = false;
  std::string status = "ok";
  std::vector<double> max_distances;
};

std::string manifest_json(const BoundingTube& tube, const RunOptions& options, bool partial,
                          const std::string& status);
ManifestInfo parse_manifest(const std::string& text);

std::string containment_json(const ContainmentReport& report, double gamma);

/// FNV-1a 64-bit digest of a file, as 16 hex digits.
std::string file_digest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Formats with 17 significant digits.
std::string format_double(double value);

}  // namespace gotube
