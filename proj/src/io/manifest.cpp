#include "tcd/io/manifest.hpp"

#include "tcd/errors.hpp"

namespace tcd {

void RunManifest::add_output(const std::filesystem::path& path) {
  const auto existing = extra.list("output");
  extra.set("output." + std::to_string(existing.size()), path.string());
}

void RunManifest::add_prior(const PriorParams& prior) {
  extra.set_double("prior.alpha", prior.alpha);
  extra.set_double("prior.beta", prior.beta);
  extra.set_double("prior.running_alpha", prior.eval_alpha());
  extra.set_double("prior.running_beta", prior.eval_beta());
  extra.set_double("prior.decay", prior.decay);
}

void RunManifest::add_noise(const NoiseParams& noise) {
  for (std::size_t c = 0; c < noise.log_var.size(); ++c)
    extra.set_double("noise.log_var." + std::to_string(c), noise.log_var[c]);
}

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  KeyValueDoc doc;
  doc.set("tool", "tcd");
  doc.set("version", kToolVersion);
  doc.set("command", manifest.command);
  for (std::size_t i = 0; i < manifest.argv.size(); ++i)
    doc.set("argv." + std::to_string(i), manifest.argv[i]);
  for (const auto& [k, v] : manifest.extra.entries) doc.set(k, v);
  save_keyvalue(path, doc);
}

RunManifest load_manifest(const std::filesystem::path& path) {
  const KeyValueDoc doc = load_keyvalue(path);
  if (doc.get_or("tool", "") != "tcd")
    throw UsageError("not a tcd manifest: " + path.string());
  RunManifest manifest;
  manifest.command = doc.get("command");
  manifest.argv = doc.list("argv");
  for (const auto& [k, v] : doc.entries)
    if (k != "tool" && k != "version" && k != "command" && k.rfind("argv.", 0) != 0)
      manifest.extra.set(k, v);
  return manifest;
}

}  // namespace tcd
