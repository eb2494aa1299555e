#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "secforage/experiment.hpp"

namespace secforage {

/// JSON experiment config. Every key is optional and falls back to the
/// ExperimentConfig default; unknown keys and type mismatches raise
/// ConfigError naming the field path (e.g. "sec.tau").
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON (sorted keys, two-space indent). parse_config of the
/// result reproduces the config.
std::string dump_config(const ExperimentConfig& config);

/// 16-hex-digit hash of the canonical JSON without output_dir and workers,
/// i.e. of everything that can change a result byte.
std::string config_hash(const ExperimentConfig& config);

/// Code version stamped into run.json.
std::string_view code_version();

}  // namespace secforage
