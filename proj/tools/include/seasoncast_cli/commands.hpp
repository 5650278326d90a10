#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seasoncast/baselines.hpp"

namespace seasoncast::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct SynthOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  fs::path data;
  fs::path out;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  bool no_climate = false;
  std::optional<BaselineKind> baseline;
  std::vector<double> quantiles;
  bool verbose = false;
};

struct TrainOutcome {
  std::string run_id;
  fs::path run_dir;
  fs::path checkpoint;
};

struct EvaluateOptions {
  fs::path checkpoint;
  fs::path data;
  fs::path out;
  std::optional<fs::path> config;
  std::string dataset;  // label in the report; defaults to the data directory name
};

struct CompareOptions {
  fs::path base;     // evaluate output directory or report.csv of the reference model
  fs::path variant;  // same for the model being assessed
  fs::path out;
};

// Each command throws seasoncast::Error on failure.
std::vector<fs::path> cmd_synth(const SynthOptions& options);
TrainOutcome cmd_train(const TrainOptions& options, std::ostream* progress = nullptr);
std::vector<fs::path> cmd_evaluate(const EvaluateOptions& options);
std::vector<fs::path> cmd_compare(const CompareOptions& options);

/// Parses argv, dispatches, and maps failures to exit codes: 0 success,
/// 2 usage, 3 data or configuration, 4 numeric failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seasoncast::cli
