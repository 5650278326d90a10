#include "seasoncast/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seasoncast/error.hpp"
#include "seasoncast/parallel.hpp"

namespace seasoncast {
namespace {

void invalid(const std::string& message) { throw Error(ErrorCode::InvalidConfig, message); }

FeatureSpec climate_feature(std::string id, ClimateAttribute attribute, EnsembleStat stat,
                            std::vector<std::size_t> encoder, std::size_t offset) {
  FeatureSpec f;
  f.id = std::move(id);
  f.kind = SeriesKind::Climate;
  f.offset = offset;
  f.attribute = attribute;
  f.stat = stat;
  // Ensemble spread features enter the encoders untransformed.
  f.transforms = stat == EnsembleStat::Mean ? TransformFlags{true, true} : TransformFlags{false, false};
  f.encoder = std::move(encoder);
  return f;
}

FeatureSpec observed_feature(std::string id, std::string source, std::vector<std::size_t> encoder) {
  FeatureSpec f;
  f.id = std::move(id);
  f.kind = SeriesKind::Observed;
  f.source = std::move(source);
  f.encoder = std::move(encoder);
  return f;
}

FeatureSpec calendar_feature(std::string id, std::string_view source, std::vector<std::size_t> encoder,
                             std::size_t offset) {
  FeatureSpec f;
  f.id = std::move(id);
  f.kind = SeriesKind::Known;
  f.offset = offset;
  f.source = std::string(source);
  f.transforms = TransformFlags{false, true};
  f.encoder = std::move(encoder);
  return f;
}

}  // namespace

void ModelConfig::validate() const {
  if (features.empty()) invalid("model needs at least one feature");
  if (horizon == 0) invalid("horizon must be positive");
  if (lookback == 0) invalid("lookback must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) invalid("dropout_rate must lie in [0, 1)");
  std::set<std::string> ids;
  for (const auto& f : features) {
    if (f.id.empty()) invalid("feature id must not be empty");
    if (!ids.insert(f.id).second) invalid("duplicate feature id '" + f.id + "'");
    if (f.kind == SeriesKind::Observed && f.offset != 0) invalid(f.id + ": observed features have offset 0");
    if (f.kind != SeriesKind::Observed && f.offset > horizon) invalid(f.id + ": offset exceeds the horizon");
    if (f.kind != SeriesKind::Climate && f.source.empty()) invalid(f.id + ": missing source series");
    for (auto n : f.encoder) {
      if (n == 0) invalid(f.id + ": encoder layer sizes must be positive");
    }
  }
  for (auto n : trunk) {
    if (n == 0) invalid("trunk layer sizes must be positive");
  }
  for (std::size_t i = 0; i < quantiles.size(); ++i) {
    const double q = quantiles[i];
    if (!(q > 0.0 && q < 1.0)) invalid("quantiles must lie in (0, 1)");
    if (i > 0 && !(q > quantiles[i - 1])) invalid("quantiles must be strictly increasing");
  }
  const auto& t = features[target_index()];
  if (t.kind != SeriesKind::Observed) invalid("target feature '" + target + "' must be observed");
}

std::size_t ModelConfig::target_index() const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].id == target) {
      return i;
    }
  }
  throw Error(ErrorCode::InvalidConfig, "target feature '" + target + "' is not among the features");
}

const std::string& ModelConfig::target_series() const { return features[target_index()].source; }

std::size_t ModelConfig::encoder_input_dim(std::size_t feature) const {
  const auto& f = features.at(feature);
  return f.window_length(lookback) - (f.transforms.apply_diff ? 1 : 0);
}

std::size_t ModelConfig::latent_dim(std::size_t feature) const {
  const auto& f = features.at(feature);
  return f.encoder.empty() ? encoder_input_dim(feature) : f.encoder.back();
}

std::size_t ModelConfig::latent_total() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    n += latent_dim(i);
  }
  return n;
}

ModelConfig without_climate(ModelConfig config) {
  std::erase_if(config.features, [](const FeatureSpec& f) { return f.kind == SeriesKind::Climate; });
  return config;
}

std::vector<double> OutputTransform::to_levels(std::span<const double> raw) const {
  std::vector<double> q = flags.apply_norm ? invert_normalize(raw, norm) : std::vector<double>(raw.begin(), raw.end());
  if (!flags.apply_diff) {
    return q;
  }
  auto levels = invert_difference(q, DiffMeta{anchor});
  levels.erase(levels.begin());
  return levels;
}

std::vector<double> OutputTransform::to_raw(std::span<const double> levels) const {
  std::vector<double> d(levels.begin(), levels.end());
  if (flags.apply_diff) {
    double prev = anchor;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      d[i] = levels[i] - prev;
      prev = levels[i];
    }
  }
  if (flags.apply_norm) {
    const double scale = norm.scale();
    for (auto& v : d) {
      v = (v - norm.mu) / scale;
    }
  }
  return d;
}

std::vector<double> OutputTransform::levels_grad_to_raw(std::span<const double> grad_levels) const {
  std::vector<double> g(grad_levels.begin(), grad_levels.end());
  if (flags.apply_diff) {
    double acc = 0.0;
    for (std::size_t i = g.size(); i-- > 0;) {
      acc += grad_levels[i];
      g[i] = acc;
    }
  }
  if (flags.apply_norm) {
    const double scale = norm.scale();
    for (auto& v : g) {
      v *= scale;
    }
  }
  return g;
}

const std::vector<double>& Forecast::point() const {
  if (values.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "forecast has no values");
  }
  if (quantiles.empty()) {
    return values.front();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < quantiles.size(); ++i) {
    if (std::abs(quantiles[i] - 0.5) < std::abs(quantiles[best] - 0.5)) {
      best = i;
    }
  }
  return values[best];
}

void ModelGrad::zero() {
  for (auto& e : encoders) {
    e.zero();
  }
  trunk.zero();
}

void ModelGrad::add(const ModelGrad& other) {
  for (std::size_t i = 0; i < encoders.size(); ++i) {
    encoders[i].add(other.encoders[i]);
  }
  trunk.add(other.trunk);
}

std::vector<std::span<double>> ModelGrad::tensors() {
  std::vector<std::span<double>> out;
  for (auto& e : encoders) {
    Mlp::collect_gradients(e, out);
  }
  Mlp::collect_gradients(trunk, out);
  return out;
}

LrlSnnModel::LrlSnnModel(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  encoders_.reserve(config_.features.size());
  for (std::size_t i = 0; i < config_.features.size(); ++i) {
    encoders_.push_back(
        Mlp::create(config_.encoder_input_dim(i), config_.features[i].encoder, config_.dropout_rate, rng));
  }
  std::vector<std::size_t> sizes = config_.trunk;
  sizes.push_back(config_.output_dim());
  trunk_ = Mlp::create(config_.latent_total(), sizes, config_.dropout_rate, rng);
}

LrlSnnModel::LrlSnnModel(ModelConfig config, std::vector<Mlp> encoders, Mlp trunk)
    : config_(std::move(config)), encoders_(std::move(encoders)), trunk_(std::move(trunk)) {
  config_.validate();
  if (encoders_.size() != config_.features.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one encoder per feature required");
  }
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    if (encoders_[i].input_dim() != config_.encoder_input_dim(i) ||
        encoders_[i].output_dim() != config_.latent_dim(i)) {
      throw Error(ErrorCode::DimensionMismatch, "encoder for '" + config_.features[i].id + "' has wrong shape");
    }
  }
  if (trunk_.input_dim() != config_.latent_total() || trunk_.output_dim() != config_.output_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "trunk shape does not match the latent/output dimensions");
  }
}

EncodedFeature LrlSnnModel::encode_feature(std::size_t feature, std::span<const double> window, bool training,
                                           Rng& rng, MlpCache* cache) const {
  const auto& spec = config_.features.at(feature);
  if (window.size() != spec.window_length(config_.lookback)) {
    throw Error(ErrorCode::DimensionMismatch, spec.id + ": window has " + std::to_string(window.size()) +
                                                  " values, expected " +
                                                  std::to_string(spec.window_length(config_.lookback)));
  }
  EncodedFeature out;
  out.transformed = apply_transforms(window, spec.transforms);
  out.latent = encoders_[feature].forward(out.transformed.values, training, rng, cache);
  return out;
}

void LrlSnnModel::check_sample(const Sample& sample) const {
  if (sample.windows.size() != config_.features.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sample has " + std::to_string(sample.windows.size()) +
                                                  " windows, model expects " +
                                                  std::to_string(config_.features.size()));
  }
}

ForwardTrace LrlSnnModel::trace(const Sample& sample, bool training, Rng& rng) const {
  check_sample(sample);
  const std::size_t target = config_.target_index();
  ForwardTrace tr;
  tr.encoder_caches.resize(config_.features.size());
  tr.latent.reserve(config_.latent_total());
  for (std::size_t i = 0; i < config_.features.size(); ++i) {
    auto enc = encode_feature(i, sample.windows[i], training, rng, &tr.encoder_caches[i]);
    tr.latent.insert(tr.latent.end(), enc.latent.begin(), enc.latent.end());
    if (i == target) {
      tr.output.flags = config_.features[i].transforms;
      tr.output.anchor = sample.windows[i].back();
      tr.output.norm = enc.transformed.norm;
    }
  }
  tr.raw = trunk_.forward(tr.latent, training, rng, &tr.trunk_cache);
  return tr;
}

void LrlSnnModel::backward(const ForwardTrace& tr, std::span<const double> grad_raw, ModelGrad& grads) const {
  const auto grad_latent = trunk_.backward(tr.trunk_cache, grad_raw, grads.trunk);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < encoders_.size(); ++i) {
    const std::size_t dim = config_.latent_dim(i);
    std::span<const double> segment(grad_latent.data() + offset, dim);
    encoders_[i].backward(tr.encoder_caches[i], segment, grads.encoders[i]);
    offset += dim;
  }
}

Forecast LrlSnnModel::to_forecast(const Sample& sample, const ForwardTrace& tr) const {
  Forecast f;
  f.entity = sample.entity;
  f.t = sample.t;
  f.quantiles = config_.quantiles;
  const std::size_t tau = config_.horizon;
  for (std::size_t q = 0; q < config_.quantile_count(); ++q) {
    f.values.push_back(tr.output.to_levels(std::span<const double>(tr.raw).subspan(q * tau, tau)));
  }
  return f;
}

Forecast LrlSnnModel::forward(const Sample& sample, bool training, Rng& rng) const {
  return to_forecast(sample, trace(sample, training, rng));
}

ModelGrad LrlSnnModel::zero_grad() const {
  ModelGrad g;
  g.encoders.reserve(encoders_.size());
  for (const auto& e : encoders_) {
    g.encoders.push_back(e.zero_grad());
  }
  g.trunk = trunk_.zero_grad();
  return g;
}

std::vector<std::span<double>> LrlSnnModel::parameters() {
  std::vector<std::span<double>> out;
  for (auto& e : encoders_) {
    e.collect_parameters(out);
  }
  trunk_.collect_parameters(out);
  return out;
}

std::vector<std::span<const double>> LrlSnnModel::parameters() const {
  auto mutable_spans = const_cast<LrlSnnModel*>(this)->parameters();
  return {mutable_spans.begin(), mutable_spans.end()};
}

std::size_t LrlSnnModel::parameter_count() const noexcept {
  std::size_t n = trunk_.parameter_count();
  for (const auto& e : encoders_) {
    n += e.parameter_count();
  }
  return n;
}

std::vector<Forecast> predict_batch(const LrlSnnModel& model, std::span<const Sample> samples, std::size_t threads) {
  std::vector<Forecast> out(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    Rng unused(0);
    out[i] = model.forward(samples[i], false, unused);
  });
  return out;
}

ModelConfig desk_config() {
  ModelConfig c;
  c.horizon = 12;
  c.lookback = 12;
  c.dropout_rate = 0.2;
  c.trunk = {64, 32};
  c.target = "P_sales";
  c.features = {
      observed_feature("P_sales", "sales", {32, 16}),
      climate_feature("T_avg", ClimateAttribute::TAvg, EnsembleStat::Mean, {32, 16}, 12),
      climate_feature("T_min", ClimateAttribute::TMin, EnsembleStat::Mean, {16, 8}, 12),
      climate_feature("T_max", ClimateAttribute::TMax, EnsembleStat::Mean, {16, 8}, 12),
      climate_feature("P_avg", ClimateAttribute::Precip, EnsembleStat::Mean, {16, 8}, 12),
      climate_feature("sigma(T_avg)", ClimateAttribute::TAvg, EnsembleStat::Std, {8, 4}, 12),
      climate_feature("sigma(T_min)", ClimateAttribute::TMin, EnsembleStat::Std, {8, 4}, 12),
      climate_feature("sigma(T_max)", ClimateAttribute::TMax, EnsembleStat::Std, {8, 4}, 12),
      climate_feature("sigma(P_avg)", ClimateAttribute::Precip, EnsembleStat::Std, {8, 4}, 12),
      calendar_feature("W_nbr", kCalendarWeek, {4}, 12),
      calendar_feature("M_nbr", kCalendarMonth, {4}, 12),
  };
  return c;
}

ModelConfig favorita_config() {
  ModelConfig c;
  c.horizon = 12;
  c.lookback = 12;
  c.dropout_rate = 0.2;
  c.trunk = {2000, 1000, 240};
  c.target = "P_sales";
  const std::vector<std::size_t> stack{512, 256, 128, 64};
  auto with_tail = [&](std::size_t tail) {
    auto s = stack;
    s.push_back(tail);
    return s;
  };
  c.features = {
      observed_feature("P_sales", "sales", with_tail(32)),
      observed_feature("P_price", "price", with_tail(16)),
      climate_feature("T_avg", ClimateAttribute::TAvg, EnsembleStat::Mean, with_tail(32), 12),
      climate_feature("T_min", ClimateAttribute::TMin, EnsembleStat::Mean, with_tail(16), 12),
      climate_feature("T_max", ClimateAttribute::TMax, EnsembleStat::Mean, with_tail(16), 12),
      climate_feature("P_avg", ClimateAttribute::Precip, EnsembleStat::Mean, with_tail(16), 12),
      climate_feature("sigma(T_avg)", ClimateAttribute::TAvg, EnsembleStat::Std, with_tail(16), 12),
      climate_feature("sigma(T_min)", ClimateAttribute::TMin, EnsembleStat::Std, with_tail(8), 12),
      climate_feature("sigma(T_max)", ClimateAttribute::TMax, EnsembleStat::Std, with_tail(8), 12),
      climate_feature("sigma(P_avg)", ClimateAttribute::Precip, EnsembleStat::Std, with_tail(8), 12),
      calendar_feature("W_nbr", kCalendarWeek, {}, 12),
      calendar_feature("M_nbr", kCalendarMonth, {}, 12),
  };
  return c;
}

}  // namespace seasoncast
