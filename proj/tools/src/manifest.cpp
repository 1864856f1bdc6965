#include "manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>

#include "itm/error.hpp"
#include "itm/format.hpp"
#include "json.hpp"

namespace itm::cli {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["master_seed"] = m.master_seed;
  j["config_file"] = "run.ini";
  nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
  for (const auto& p : m.inputs) {
    inputs.push_back({{"path", p.string()}, {"fnv1a64", std::filesystem::is_regular_file(p) ? file_fingerprint(p) : ""}});
  }
  j["inputs"] = inputs;
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) outputs.push_back({{"path", p.string()}, {"fnv1a64", file_fingerprint(dir / p)}});
  j["outputs"] = outputs;
  j["started"] = m.started;
  j["finished"] = m.finished;

  std::ofstream config(dir / "run.ini");
  if (!config) throw IoError("cannot write " + (dir / "run.ini").string());
  config << m.config;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

}  // namespace itm::cli
