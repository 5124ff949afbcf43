#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace readout {

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double value);

// CSV with a header row, dot decimals, round-trip number formatting.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// CSV from pre-formatted cells, for rows mixing text and numbers.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

inline constexpr const char* kToolVersion = "1.0.0";

// Record of one CLI invocation: enough resolved state to reproduce every
// output file byte for byte.
struct RunManifest {
  std::string subcommand;
  std::string config_json;  // full resolved configuration object
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;
};

void save_manifest(const std::string& path, const RunManifest& manifest);
RunManifest load_manifest(const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace readout
