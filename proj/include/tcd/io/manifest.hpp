// Run manifests: a human-readable record of each CLI invocation (tool
// version, subcommand, full argument list, seeds, final model state and
// output paths), sufficient to replay the run identically.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tcd/io/keyvalue.hpp"
#include "tcd/noise.hpp"
#include "tcd/prior.hpp"

namespace tcd {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunManifest {
  std::string command;             // subcommand name
  std::vector<std::string> argv;   // subcommand arguments as given
  KeyValueDoc extra;               // config snapshot, model state, outputs

  void add_output(const std::filesystem::path& path);
  void add_prior(const PriorParams& prior);
  void add_noise(const NoiseParams& noise);
};

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace tcd
