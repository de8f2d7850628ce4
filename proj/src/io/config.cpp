#include "tcd/io/config.hpp"

#include <set>
#include <string>

namespace tcd {

namespace {

void reject_unknown(const KeyValueDoc& doc, const std::set<std::string>& known,
                    const char* what) {
  for (const auto& [k, v] : doc.entries)
    if (!known.count(k))
      throw UsageError(std::string(what) + ": unknown key '" + k + "'");
}

}  // namespace

RegistrationConfig registration_config_from_doc(const KeyValueDoc& doc) {
  static const std::set<std::string> known = {
      "iterations",     "samples",       "learning_rate_mu", "learning_rate_logv",
      "pyramid_levels", "init_log_v",    "seed",             "decay",
      "epoch_iters",    "update_prior",  "update_noise"};
  reject_unknown(doc, known, "registration config");
  RegistrationConfig cfg;
  cfg.iterations = static_cast<int>(doc.get_int_or("iterations", cfg.iterations));
  cfg.samples_per_step = static_cast<int>(doc.get_int_or("samples", cfg.samples_per_step));
  cfg.learning_rate_mu = doc.get_double_or("learning_rate_mu", cfg.learning_rate_mu);
  cfg.learning_rate_logv = doc.get_double_or("learning_rate_logv", cfg.learning_rate_logv);
  cfg.pyramid_levels = static_cast<int>(doc.get_int_or("pyramid_levels", cfg.pyramid_levels));
  cfg.init_log_v = doc.get_double_or("init_log_v", cfg.init_log_v);
  cfg.seed = doc.get_u64_or("seed", cfg.seed);
  cfg.decay = doc.get_double_or("decay", cfg.decay);
  cfg.epoch_iters = static_cast<int>(doc.get_int_or("epoch_iters", cfg.epoch_iters));
  cfg.update_prior = doc.get_int_or("update_prior", cfg.update_prior ? 1 : 0) != 0;
  cfg.update_noise_variance = doc.get_int_or("update_noise", cfg.update_noise_variance ? 1 : 0) != 0;
  cfg.validate();
  return cfg;
}

RegistrationConfig load_registration_config(const std::filesystem::path& path) {
  return registration_config_from_doc(load_keyvalue(path));
}

KeyValueDoc registration_config_to_doc(const RegistrationConfig& cfg) {
  KeyValueDoc doc;
  doc.set_int("iterations", cfg.iterations);
  doc.set_int("samples", cfg.samples_per_step);
  doc.set_double("learning_rate_mu", cfg.learning_rate_mu);
  doc.set_double("learning_rate_logv", cfg.learning_rate_logv);
  doc.set_int("pyramid_levels", cfg.pyramid_levels);
  doc.set_double("init_log_v", cfg.init_log_v);
  doc.set_u64("seed", cfg.seed);
  doc.set_double("decay", cfg.decay);
  doc.set_int("epoch_iters", cfg.epoch_iters);
  doc.set_int("update_prior", cfg.update_prior ? 1 : 0);
  doc.set_int("update_noise", cfg.update_noise_variance ? 1 : 0);
  return doc;
}

SynthSpec synth_spec_from_doc(const KeyValueDoc& doc) {
  static const std::set<std::string> known = {
      "size",       "texture_corr_px",  "texture_contrast", "deform_amplitude_px",
      "deform_smoothness_px", "blob_radius_px", "blob_delta", "blob_count", "seed"};
  reject_unknown(doc, known, "synth spec");
  SynthSpec spec;
  spec.size = static_cast<int>(doc.get_int_or("size", spec.size));
  spec.texture_corr_px = doc.get_double_or("texture_corr_px", spec.texture_corr_px);
  spec.texture_contrast = doc.get_double_or("texture_contrast", spec.texture_contrast);
  spec.deform_amplitude_px = doc.get_double_or("deform_amplitude_px", spec.deform_amplitude_px);
  spec.deform_smoothness_px = doc.get_double_or("deform_smoothness_px", spec.deform_smoothness_px);
  spec.blob_radius_px = doc.get_double_or("blob_radius_px", spec.blob_radius_px);
  spec.blob_delta = doc.get_double_or("blob_delta", spec.blob_delta);
  spec.blob_count = static_cast<int>(doc.get_int_or("blob_count", spec.blob_count));
  spec.seed = doc.get_u64_or("seed", spec.seed);
  spec.validate();
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return synth_spec_from_doc(load_keyvalue(path));
}

KeyValueDoc synth_spec_to_doc(const SynthSpec& spec) {
  KeyValueDoc doc;
  doc.set_int("size", spec.size);
  doc.set_double("texture_corr_px", spec.texture_corr_px);
  doc.set_double("texture_contrast", spec.texture_contrast);
  doc.set_double("deform_amplitude_px", spec.deform_amplitude_px);
  doc.set_double("deform_smoothness_px", spec.deform_smoothness_px);
  doc.set_double("blob_radius_px", spec.blob_radius_px);
  doc.set_double("blob_delta", spec.blob_delta);
  doc.set_int("blob_count", spec.blob_count);
  doc.set_u64("seed", spec.seed);
  return doc;
}

}  // namespace tcd
