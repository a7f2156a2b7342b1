#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "advforge/experiment.hpp"

namespace advforge {

/// Everything a run needs, loaded from one JSON file with optional sections
/// "rules", "generator", "train", "attack", "merge" and "experiment".
/// Missing sections and keys keep their defaults; unknown sections or keys
/// are rejected so typos cannot silently fall back to defaults.
struct AppConfig {
  ExperimentConfig experiment;  // rules live in experiment.generator.rule_params
  std::uint64_t model_seed = 0;  // weight init seed for standalone training
};

/// Parses config JSON. Throws ConfigError on malformed JSON, unknown keys,
/// wrong types or invalid values.
AppConfig parse_config(const std::string& text);

/// parse_config over the file's contents; a missing file is a ConfigError
/// naming the path.
AppConfig load_config(const std::filesystem::path& path);

/// The bundled default configuration, serialized with every key present.
std::string default_config_json();

}  // namespace advforge
