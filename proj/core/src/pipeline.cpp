#include "seasoncast/pipeline.hpp"

#include <set>

#include "seasoncast/error.hpp"

namespace seasoncast {

void check_schema(const Dataset& dataset, const ModelConfig& model) {
  std::set<std::string> series;
  for (const auto& [entity, by_id] : dataset.series) {
    for (const auto& [id, _] : by_id) {
      series.insert(id);
    }
  }
  std::set<ClimateAttribute> attributes;
  for (const auto& f : dataset.ensembles) {
    attributes.insert(f.attribute);
  }
  for (const auto& f : model.features) {
    if (f.kind == SeriesKind::Observed && !series.contains(f.source)) {
      throw Error(ErrorCode::ConfigMismatch, "feature '" + f.id + "' reads series '" + f.source + "', absent from the data");
    }
    if (f.kind == SeriesKind::Climate && !attributes.contains(f.attribute)) {
      throw Error(ErrorCode::ConfigMismatch, "feature '" + f.id + "' needs " + std::string(to_string(f.attribute)) +
                                                 " ensembles, absent from the data");
    }
  }
}

PreparedSamples prepare_samples(const Dataset& dataset, const ModelConfig& model, const SplitConfig& split,
                                std::size_t threads) {
  model.validate();
  check_schema(dataset, model);
  AssembleOptions options;
  options.threads = threads;
  SampleSet set =
      assemble_samples(dataset, model.features, model.target_series(), model.lookback, model.horizon, options);
  PreparedSamples out;
  out.skipped = std::move(set.skipped);
  out.cuts = split_by_fractions(set.samples, split.train_fraction, split.dev_fraction, model.horizon);
  out.split = chronological_split(std::move(set.samples), out.cuts);
  return out;
}

std::vector<std::vector<double>> targets_of(std::span<const Sample> samples) {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(s.target);
  }
  return out;
}

TrainedModel fit(const ModelConfig& model, const TrainConfig& train, const PreparedSamples& data, std::ostream* log) {
  TrainedModel out{LrlSnnModel(model, train.seed), {}};
  out.history = seasoncast::train(out.model, data.split.train, data.split.dev, train, log);
  return out;
}

std::vector<MetricBucket> evaluate_model(const LrlSnnModel& model, std::span<const Sample> samples,
                                         std::size_t threads) {
  const auto forecasts = predict_batch(model, samples, threads);
  const auto truths = targets_of(samples);
  return bucketed_report(std::span<const Forecast>(forecasts), std::span<const std::vector<double>>(truths));
}

}  // namespace seasoncast
