#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hysteresis {

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

struct OutputFile {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

/// Provenance record written next to every CLI run.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<OutputFile> outputs;
  nlohmann::json status = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Writes `content` to dir / name (creating dir) and records it in the manifest.
void write_output(const std::filesystem::path& dir, const std::string& name,
                  const std::string& content, RunManifest& manifest);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hysteresis
