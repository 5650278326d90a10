#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "seasoncast/model.hpp"
#include "seasoncast/synth.hpp"
#include "seasoncast/training.hpp"

namespace seasoncast {

/// Chronological split placement as fractions of the distinct sample times.
struct SplitConfig {
  double train_fraction = 0.55;
  double dev_fraction = 0.2;
};

/// Everything `seasoncast train` needs besides the data.
struct RunConfig {
  ModelConfig model = desk_config();
  TrainConfig train;
  SplitConfig split;
};

/// Desk-scale defaults used by the CLI when no config file is given.
RunConfig default_run_config();

// JSON text in canonical form (sorted keys, compact), so hashes of the text
// are stable. Parsers fill unspecified keys with defaults and reject unknown
// keys with InvalidConfig.
std::string to_json(const ModelConfig& config);
std::string to_json(const TrainConfig& config);
std::string to_json(const SplitConfig& config);
std::string to_json(const RunConfig& config);
std::string to_json(const SynthConfig& config);

ModelConfig model_config_from_json(std::string_view text);
TrainConfig train_config_from_json(std::string_view text);
RunConfig run_config_from_json(std::string_view text);
SynthConfig synth_config_from_json(std::string_view text);

/// Reads a whole file; IoError names the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t value);

std::uint64_t config_hash(const ModelConfig& config);

}  // namespace seasoncast
