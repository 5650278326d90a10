#include "seasoncast/nn.hpp"

#include <cmath>
#include <string>

#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
  }
}

}  // namespace

void MlpGrad::zero() {
  for (auto& layer : layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.biases.begin(), layer.biases.end(), 0.0);
  }
}

void MlpGrad::add(const MlpGrad& other) {
  check_dim(other.layers.size(), layers.size(), "MlpGrad::add layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& dst = layers[l];
    const auto& src = other.layers[l];
    for (std::size_t i = 0; i < dst.weights.size(); ++i) {
      dst.weights[i] += src.weights[i];
    }
    for (std::size_t i = 0; i < dst.biases.size(); ++i) {
      dst.biases[i] += src.biases[i];
    }
  }
}

Mlp::Mlp(std::size_t input_dim, std::vector<DenseLayer> layers, double dropout_rate)
    : input_dim_(input_dim), layers_(std::move(layers)), dropout_rate_(dropout_rate) {
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "dropout rate must lie in [0, 1)");
  }
  std::size_t dim = input_dim_;
  for (const auto& layer : layers_) {
    check_dim(layer.in_dim, dim, "Mlp layer chain");
    check_dim(layer.weights.size(), layer.in_dim * layer.out_dim, "Mlp weight tensor");
    check_dim(layer.biases.size(), layer.out_dim, "Mlp bias tensor");
    dim = layer.out_dim;
  }
}

Mlp Mlp::create(std::size_t input_dim, std::span<const std::size_t> sizes, double dropout_rate,
                 Rng& init_rng) {
  std::vector<DenseLayer> layers;
  layers.reserve(sizes.size());
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (sizes[l] == 0) {
      throw Error(ErrorCode::InvalidConfig, "layer sizes must be positive");
    }
    DenseLayer layer;
    layer.in_dim = fan_in;
    layer.out_dim = sizes[l];
    layer.activation = (l + 1 == sizes.size()) ? Activation::Identity : Activation::ReLU;
    const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    layer.weights.resize(layer.in_dim * layer.out_dim);
    for (auto& w : layer.weights) {
      w = uniform(init_rng, -limit, limit);
    }
    layer.biases.assign(layer.out_dim, 0.0);
    fan_in = layer.out_dim;
    layers.push_back(std::move(layer));
  }
  return Mlp(input_dim, std::move(layers), dropout_rate);
}

std::size_t Mlp::output_dim() const noexcept {
  return layers_.empty() ? input_dim_ : layers_.back().out_dim;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += layer.weights.size() + layer.biases.size();
  }
  return n;
}

std::vector<double> Mlp::forward(std::span<const double> input, bool training, Rng& rng,
                                 MlpCache* cache) const {
  check_dim(input.size(), input_dim_, "Mlp::forward input");
  const bool dropout_on = training && dropout_rate_ > 0.0;
  if (cache != nullptr) {
    cache->inputs.resize(layers_.size());
    cache->pre.resize(layers_.size());
    cache->masks.resize(layers_.size());
  }
  std::vector<double> x(input.begin(), input.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    std::vector<double> z(layer.biases);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double* row = layer.weights.data() + o * layer.in_dim;
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        acc += row[i] * x[i];
      }
      z[o] += acc;
    }
    std::vector<double> a(z);
    if (layer.activation == Activation::ReLU) {
      for (auto& v : a) {
        v = v > 0.0 ? v : 0.0;
      }
    }
    std::vector<double> mask;
    const bool hidden = l + 1 < layers_.size();
    if (dropout_on && hidden) {
      const double keep = 1.0 - dropout_rate_;
      mask.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        mask[i] = uniform01(rng) < keep ? 1.0 / keep : 0.0;
        a[i] *= mask[i];
      }
    }
    if (cache != nullptr) {
      cache->inputs[l] = std::move(x);
      cache->pre[l] = std::move(z);
      cache->masks[l] = std::move(mask);
    }
    x = std::move(a);
  }
  return x;
}

std::vector<double> Mlp::backward(const MlpCache& cache, std::span<const double> upstream,
                                  MlpGrad& grads) const {
  check_dim(upstream.size(), output_dim(), "Mlp::backward upstream");
  check_dim(cache.inputs.size(), layers_.size(), "Mlp::backward cache");
  check_dim(grads.layers.size(), layers_.size(), "Mlp::backward grads");
  std::vector<double> g(upstream.begin(), upstream.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const auto& mask = cache.masks[l];
    if (!mask.empty()) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] *= mask[i];
      }
    }
    if (layer.activation == Activation::ReLU) {
      const auto& pre = cache.pre[l];
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (pre[i] <= 0.0) {
          g[i] = 0.0;
        }
      }
    }
    auto& lg = grads.layers[l];
    const auto& x = cache.inputs[l];
    std::vector<double> gx(layer.in_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double go = g[o];
      lg.biases[o] += go;
      if (go == 0.0) {
        continue;
      }
      double* grow = lg.weights.data() + o * layer.in_dim;
      const double* wrow = layer.weights.data() + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) {
        grow[i] += go * x[i];
        gx[i] += go * wrow[i];
      }
    }
    g = std::move(gx);
  }
  return g;
}

MlpGrad Mlp::zero_grad() const {
  MlpGrad grads;
  grads.layers.reserve(layers_.size());
  for (const auto& layer : layers_) {
    grads.layers.push_back(DenseGrad{std::vector<double>(layer.weights.size(), 0.0),
                                     std::vector<double>(layer.biases.size(), 0.0)});
  }
  return grads;
}

void Mlp::collect_parameters(std::vector<std::span<double>>& out) {
  for (auto& layer : layers_) {
    out.emplace_back(layer.weights);
    out.emplace_back(layer.biases);
  }
}

void Mlp::collect_gradients(MlpGrad& grads, std::vector<std::span<double>>& out) {
  for (auto& layer : grads.layers) {
    out.emplace_back(layer.weights);
    out.emplace_back(layer.biases);
  }
}

void Adam::step(std::span<const std::span<double>> params, std::span<const std::span<double>> grads) {
  check_dim(grads.size(), params.size(), "Adam::step tensor count");
  if (first_moment_.empty() && !params.empty()) {
    first_moment_.resize(params.size());
    second_moment_.resize(params.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      first_moment_[t].assign(params[t].size(), 0.0);
      second_moment_[t].assign(params[t].size(), 0.0);
    }
  }
  check_dim(first_moment_.size(), params.size(), "Adam::step moment buffers");
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    check_dim(g.size(), p.size(), "Adam::step tensor");
    check_dim(first_moment_[t].size(), p.size(), "Adam::step moment tensor");
    auto& m = first_moment_[t];
    auto& v = second_moment_[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double global_norm(std::span<const std::span<double>> tensors) {
  double ss = 0.0;
  for (auto t : tensors) {
    for (double v : t) {
      ss += v * v;
    }
  }
  return std::sqrt(ss);
}

double clip_global_norm(std::span<const std::span<double>> tensors, double max_norm) {
  const double norm = global_norm(tensors);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto t : tensors) {
      for (auto& v : t) {
        v *= factor;
      }
    }
  }
  return norm;
}

}  // namespace seasoncast
