#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace itm::cli {

/// manifest.json for one output directory. Artifact fingerprints are FNV-1a
/// 64 over file bytes.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config;  ///< replayable config text, also written as run.ini
  std::uint64_t master_seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;  ///< relative to the output directory
  std::string started;
  std::string finished;
};

std::string utc_timestamp();
std::string file_fingerprint(const std::filesystem::path& path);

/// Writes manifest.json and run.ini into `dir`.
void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest);

}  // namespace itm::cli
