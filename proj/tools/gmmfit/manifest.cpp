#include "manifest.hpp"

#include <stdexcept>

#include "gmmfit/io.hpp"

namespace gmmfit::cli {

std::string RunManifest::dump() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["seed"] = seed;
  j["config"] = config;
  j["argv"] = argv;
  j["tool_version"] = tool_version;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::parse(const std::string& text) {
  RunManifest m;
  try {
    auto j = nlohmann::ordered_json::parse(text);
    m.subcommand = j.at("subcommand").get<std::string>();
    m.inputs = j.at("inputs").get<std::vector<std::string>>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.tool_version = j.at("tool_version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad manifest: ") + e.what());
  }
  return m;
}

std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

void write_manifests(const RunManifest& m) {
  const auto text = m.dump();
  for (const auto& out : m.outputs) write_text_file(manifest_path(out), text);
}

}  // namespace gmmfit::cli
