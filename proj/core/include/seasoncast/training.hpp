#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "seasoncast/features.hpp"
#include "seasoncast/model.hpp"

namespace seasoncast {

enum class LossKind { MSE, Pinball };

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t minibatch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::MSE;
  std::vector<double> quantiles;  // Pinball only; must equal the model's quantiles
  bool shuffle = true;
  double clip_norm = 10.0;
  std::size_t threads = 1;

  void validate() const;
};

/// q * (y - yhat) when y >= yhat, else (1 - q) * (yhat - y).
double pinball_loss(double q, double y, double yhat);

double mse_loss(std::span<const double> y, std::span<const double> yhat);

/// Per-sample training loss on the level forecast, measured in units of the
/// target window's normalization scale. Fills d(loss)/d(raw head output)
/// when `grad_raw` is non-null.
double sample_loss(const ForwardTrace& trace, const Sample& sample, const ModelConfig& model,
                   const TrainConfig& config, std::vector<double>* grad_raw = nullptr);

/// Mean inference-mode loss over `samples` (0 for an empty span).
double evaluate_loss(const LrlSnnModel& model, std::span<const Sample> samples, const TrainConfig& config);

/// Time cuts: t <= train_end is train, train_end < t <= dev_end is dev, the
/// rest is test. A sample whose target would cross the cut of its own
/// partition is dropped.
struct SplitSpec {
  WeekIndex train_end = 0;
  WeekIndex dev_end = 0;
  std::size_t horizon = 0;
};

struct SplitResult {
  std::vector<Sample> train;
  std::vector<Sample> dev;
  std::vector<Sample> test;
  std::size_t dropped = 0;
};

/// Throws DegenerateSplit when any partition ends up empty.
SplitResult chronological_split(std::vector<Sample> samples, const SplitSpec& spec);

/// Cuts placed at the given fractions of the distinct sample times.
SplitSpec split_by_fractions(std::span<const Sample> samples, double train_fraction, double dev_fraction,
                             std::size_t horizon);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // index into epochs

  /// Losses and best epoch equal (wall times are ignored).
  bool same_losses(const TrainHistory& other) const noexcept;
};

/// Minibatch Adam with per-epoch seeded shuffling and global-norm clipping.
/// Leaves `model` holding the parameters of the epoch with the lowest dev
/// loss (train loss when `dev` is empty).
///
/// Throws NonFiniteLoss naming the epoch and batch that diverged.
TrainHistory train(LrlSnnModel& model, std::span<const Sample> train_set, std::span<const Sample> dev_set,
                   const TrainConfig& config, std::ostream* log = nullptr);

}  // namespace seasoncast
