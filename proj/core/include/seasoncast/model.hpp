#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seasoncast/features.hpp"
#include "seasoncast/nn.hpp"
#include "seasoncast/random.hpp"
#include "seasoncast/window_transforms.hpp"

namespace seasoncast {

struct ModelConfig {
  std::vector<FeatureSpec> features;
  std::string target = "P_sales";      // id of the Observed feature being forecast
  std::vector<std::size_t> trunk{64, 32};  // hidden sizes of the shared trunk
  std::size_t horizon = 12;
  std::size_t lookback = 12;
  double dropout_rate = 0.2;
  std::vector<double> quantiles;  // empty: point forecast

  /// Throws InvalidConfig on unknown target, duplicate ids, bad offsets or
  /// quantiles outside (0, 1).
  void validate() const;

  std::size_t target_index() const;
  std::size_t quantile_count() const noexcept { return quantiles.empty() ? 1 : quantiles.size(); }
  std::size_t output_dim() const noexcept { return horizon * quantile_count(); }
  std::size_t encoder_input_dim(std::size_t feature) const;
  std::size_t latent_dim(std::size_t feature) const;
  std::size_t latent_total() const;

  /// The target's source series id in the data file.
  const std::string& target_series() const;
};

/// Drops every Climate-kind feature (the climate-agnostic twin).
ModelConfig without_climate(ModelConfig config);

/// Maps raw head outputs (transformed space) back to target units using the
/// target window's own transform metadata, and back again.
///
/// Level forecast: Q = P * scale + mu, then y(t+j) = y(t) + sum_{i<=j} Q(i)
/// when differencing is on; each stage is skipped when its flag is off.
struct OutputTransform {
  TransformFlags flags;
  double anchor = 0.0;  // last observed target value y(t)
  NormMeta norm{0.0, 1.0};

  std::vector<double> to_levels(std::span<const double> raw) const;
  std::vector<double> to_raw(std::span<const double> levels) const;

  /// Chain rule through to_levels: d(loss)/d(raw) from d(loss)/d(levels).
  std::vector<double> levels_grad_to_raw(std::span<const double> grad_levels) const;

  /// Per-sample loss unit: the normalization scale when normalizing, else 1.
  double loss_scale() const noexcept { return flags.apply_norm ? norm.scale() : 1.0; }
};

struct Forecast {
  std::string entity;
  WeekIndex t = 0;
  std::vector<double> quantiles;            // empty: point forecast
  std::vector<std::vector<double>> values;  // one length-horizon sequence per quantile

  /// The point forecast, or the median (nearest quantile to 0.5).
  const std::vector<double>& point() const;
};

struct ModelGrad {
  std::vector<MlpGrad> encoders;
  MlpGrad trunk;

  void zero();
  void add(const ModelGrad& other);
  std::vector<std::span<double>> tensors();
};

/// Everything from one forward pass needed to backpropagate.
struct ForwardTrace {
  std::vector<MlpCache> encoder_caches;
  MlpCache trunk_cache;
  std::vector<double> latent;  // H, concatenated in feature order
  std::vector<double> raw;     // head output P, quantile-major
  OutputTransform output;
};

struct EncodedFeature {
  std::vector<double> latent;
  TransformedWindow transformed;
};

/// Per-feature temporal encoders feeding one shared trunk whose last layer
/// emits horizon x quantiles values in the target's transformed space.
class LrlSnnModel {
 public:
  LrlSnnModel(ModelConfig config, std::uint64_t init_seed);
  LrlSnnModel(ModelConfig config, std::vector<Mlp> encoders, Mlp trunk);

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<Mlp>& encoders() const noexcept { return encoders_; }
  std::vector<Mlp>& encoders() noexcept { return encoders_; }
  const Mlp& trunk() const noexcept { return trunk_; }
  Mlp& trunk() noexcept { return trunk_; }

  EncodedFeature encode_feature(std::size_t feature, std::span<const double> window, bool training, Rng& rng,
                                MlpCache* cache = nullptr) const;

  Forecast forward(const Sample& sample, bool training, Rng& rng) const;

  ForwardTrace trace(const Sample& sample, bool training, Rng& rng) const;
  void backward(const ForwardTrace& trace, std::span<const double> grad_raw, ModelGrad& grads) const;

  ModelGrad zero_grad() const;

  /// Encoders in feature order, then the trunk; per layer weights then biases.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::size_t parameter_count() const noexcept;

 private:
  void check_sample(const Sample& sample) const;
  Forecast to_forecast(const Sample& sample, const ForwardTrace& trace) const;

  ModelConfig config_;
  std::vector<Mlp> encoders_;
  Mlp trunk_;
};

/// Inference over many samples: dropout off, order preserved, deterministic.
std::vector<Forecast> predict_batch(const LrlSnnModel& model, std::span<const Sample> samples,
                                    std::size_t threads = 1);

/// Feature layout used for the synthetic datasets: sales history, the
/// ensemble mean/std of all four climate attributes, and week/month numbers.
ModelConfig desk_config();

/// Favorita-scale configuration with the published layer sizes.
ModelConfig favorita_config();

}  // namespace seasoncast
