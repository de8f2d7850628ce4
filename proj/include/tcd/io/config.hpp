// Typed schemas over flat key/value files for registration configs and
// synthesis specs. Unknown keys are usage errors; missing keys fall back to
// the built-in defaults.
#pragma once

#include <filesystem>

#include "tcd/io/keyvalue.hpp"
#include "tcd/registration.hpp"
#include "tcd/synth.hpp"

namespace tcd {

RegistrationConfig registration_config_from_doc(const KeyValueDoc& doc);
RegistrationConfig load_registration_config(const std::filesystem::path& path);
KeyValueDoc registration_config_to_doc(const RegistrationConfig& cfg);

SynthSpec synth_spec_from_doc(const KeyValueDoc& doc);
SynthSpec load_synth_spec(const std::filesystem::path& path);
KeyValueDoc synth_spec_to_doc(const SynthSpec& spec);

}  // namespace tcd
