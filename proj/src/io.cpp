#include "readout/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace readout {

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buffer, ptr);
}

namespace {

template <typename Row, typename Cell>
void write_csv_impl(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<Row>& rows, Cell&& cell) {
  std::ofstream out(path, std::ios::binary);  // binary: fixed newlines everywhere
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw std::invalid_argument("csv row width does not match the header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << cell(row[i]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  write_csv_impl(path, header, rows, [](double v) { return format_double(v); });
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  write_csv_impl(path, header, rows, [](const std::string& v) { return v; });
}

void save_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["subcommand"] = manifest.subcommand;
  j["config"] = nlohmann::json::parse(manifest.config_json);
  j["seed"] = manifest.seed;
  j["version"] = manifest.version;
  j["duration_seconds"] = manifest.duration_seconds;
  j["outputs"] = manifest.outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open manifest file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open manifest file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed manifest " + path + ": " + e.what());
  }
  RunManifest manifest;
  try {
    manifest.subcommand = j.at("subcommand").get<std::string>();
    manifest.config_json = j.at("config").dump();
    manifest.seed = j.at("seed").get<std::uint64_t>();
    manifest.version = j.value("version", std::string(kToolVersion));
    manifest.duration_seconds = j.value("duration_seconds", 0.0);
    manifest.outputs = j.value("outputs", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("incomplete manifest " + path + ": " + e.what());
  }
  return manifest;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace readout
