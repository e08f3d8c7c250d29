#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace gmmfit::cli {

// Record written next to every output file. `argv` replays the run.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::string> argv;
  std::string tool_version = GMMFIT_TOOL_VERSION;

  std::string dump() const;
  static RunManifest parse(const std::string& text);
};

std::string manifest_path(const std::string& output);

// Writes the manifest beside each of its outputs.
void write_manifests(const RunManifest& m);

}  // namespace gmmfit::cli
