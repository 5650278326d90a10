#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "seasoncast/baselines.hpp"
#include "seasoncast/model.hpp"

namespace seasoncast {

enum class CheckpointKind : std::uint32_t { LrlSnn = 0, Persistence = 1, SeasonalNaive = 2 };

/// Little-endian binary layout:
///   "SCCKPT01" | u32 version | u64 config hash | u64 seed | u32 kind |
///   u64 config length | config JSON | u64 tensor count |
///   per tensor: u64 length, f64 values
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  CheckpointKind kind = CheckpointKind::LrlSnn;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  ModelConfig config;
  std::vector<std::vector<double>> tensors;  // empty for baselines
};

Checkpoint make_checkpoint(const LrlSnnModel& model, std::uint64_t seed);
Checkpoint make_baseline_checkpoint(BaselineKind kind, const ModelConfig& config, std::uint64_t seed);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// ParseError on a malformed file, ConfigMismatch when the stored hash does
/// not match the embedded config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model; ConfigMismatch when the tensor shapes disagree with
/// the config or when `expected` is given and differs from the stored config.
LrlSnnModel model_from_checkpoint(const Checkpoint& checkpoint, const ModelConfig* expected = nullptr);

BaselineKind baseline_of(CheckpointKind kind);

}  // namespace seasoncast
