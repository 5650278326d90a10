#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "seasoncast/random.hpp"

namespace seasoncast {

enum class Activation { ReLU, Identity };

/// y = act(W x + b) with W stored row-major as out_dim x in_dim.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;
  Activation activation = Activation::Identity;
};

struct DenseGrad {
  std::vector<double> weights;
  std::vector<double> biases;
};

struct MlpGrad {
  std::vector<DenseGrad> layers;

  void zero();
  void add(const MlpGrad& other);
};

/// Everything backward() needs from one forward pass.
struct MlpCache {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // pre-activation of each layer
  std::vector<std::vector<double>> masks;   // inverted-dropout multipliers, empty when off
};

/// Feedforward stack. A stack with no layers is a passthrough encoder that
/// hands its input on unchanged (the "concatenation" encoder).
///
/// Dropout (inverted) is applied after every layer except the last, and only
/// when forward() is called with training = true.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t input_dim, std::vector<DenseLayer> layers, double dropout_rate);

  /// He-uniform weights, zero biases. ReLU on all layers but the last, which
  /// is Identity.
  static Mlp create(std::size_t input_dim, std::span<const std::size_t> sizes,
                    double dropout_rate, Rng& init_rng);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept;
  double dropout_rate() const noexcept { return dropout_rate_; }
  std::size_t parameter_count() const noexcept;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::vector<double> forward(std::span<const double> input, bool training, Rng& rng,
                              MlpCache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
  std::vector<double> backward(const MlpCache& cache, std::span<const double> upstream,
                               MlpGrad& grads) const;

  MlpGrad zero_grad() const;

  /// Appends spans over every tensor (per layer: weights, then biases).
  void collect_parameters(std::vector<std::span<double>>& out);
  static void collect_gradients(MlpGrad& grads, std::vector<std::span<double>>& out);

 private:
  std::size_t input_dim_ = 0;
  std::vector<DenseLayer> layers_;
  double dropout_rate_ = 0.0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are shaped on the first step
/// and must keep matching the parameter tensors afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads);

  std::uint64_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

double global_norm(std::span<const std::span<double>> tensors);

/// Rescales all tensors so their joint L2 norm is at most max_norm. Returns
/// the norm before clipping.
double clip_global_norm(std::span<const std::span<double>> tensors, double max_norm);

}  // namespace seasoncast
