#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seasoncast/config_io.hpp"
#include "seasoncast/dataset.hpp"
#include "seasoncast/evaluation.hpp"
#include "seasoncast/features.hpp"
#include "seasoncast/model.hpp"
#include "seasoncast/training.hpp"

namespace seasoncast {

/// ConfigMismatch unless the data holds every observed series and climate
/// attribute the model reads.
void check_schema(const Dataset& dataset, const ModelConfig& model);

struct PreparedSamples {
  SplitResult split;
  SplitSpec cuts;
  SkipReport skipped;
};

/// Checks the schema, assembles every admissible sample for `model` and splits it
/// chronologically at the configured fractions.
PreparedSamples prepare_samples(const Dataset& dataset, const ModelConfig& model, const SplitConfig& split,
                                std::size_t threads = 1);

std::vector<std::vector<double>> targets_of(std::span<const Sample> samples);

/// Trains a fresh model seeded from `train.seed` and returns it with its history.
struct TrainedModel {
  LrlSnnModel model;
  TrainHistory history;
};
TrainedModel fit(const ModelConfig& model, const TrainConfig& train, const PreparedSamples& data,
                 std::ostream* log = nullptr);

/// Bucketed test-set metrics of a model.
std::vector<MetricBucket> evaluate_model(const LrlSnnModel& model, std::span<const Sample> samples,
                                         std::size_t threads = 1);

}  // namespace seasoncast
