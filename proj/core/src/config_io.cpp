#include "seasoncast/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

using nlohmann::json;

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + ": expected a JSON object");
  }
  const std::set<std::string_view> names(allowed);
  for (const auto& [key, _] : j.items()) {
    if (!names.contains(key)) {
      throw Error(ErrorCode::InvalidConfig, std::string(what) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const char* what) {
  if (!j.contains(key)) {
    return;
  }
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + "." + key + ": " + e.what());
  }
}

json feature_to_json(const FeatureSpec& f) {
  json j;
  j["id"] = f.id;
  j["kind"] = std::string(to_string(f.kind));
  j["offset"] = f.offset;
  j["apply_diff"] = f.transforms.apply_diff;
  j["apply_norm"] = f.transforms.apply_norm;
  j["encoder"] = f.encoder;
  if (f.kind == SeriesKind::Climate) {
    j["attribute"] = std::string(to_string(f.attribute));
    j["stat"] = std::string(to_string(f.stat));
  } else {
    j["source"] = f.source;
  }
  return j;
}

FeatureSpec feature_from_json(const json& j) {
  check_keys(j, {"id", "kind", "offset", "apply_diff", "apply_norm", "encoder", "attribute", "stat", "source"},
             "feature");
  FeatureSpec f;
  read(j, "id", f.id, "feature");
  std::string kind = "observed";
  read(j, "kind", kind, "feature");
  f.kind = parse_series_kind(kind);
  read(j, "offset", f.offset, "feature");
  // Spread features default to the untransformed path, everything else to
  // difference-then-normalize.
  std::string stat = "mean";
  read(j, "stat", stat, "feature");
  f.stat = parse_ensemble_stat(stat);
  const bool spread = f.kind == SeriesKind::Climate && f.stat == EnsembleStat::Std;
  f.transforms = spread ? TransformFlags{false, false} : TransformFlags{true, true};
  read(j, "apply_diff", f.transforms.apply_diff, "feature");
  read(j, "apply_norm", f.transforms.apply_norm, "feature");
  read(j, "encoder", f.encoder, "feature");
  std::string attribute = "tavg";
  read(j, "attribute", attribute, "feature");
  f.attribute = parse_climate_attribute(attribute);
  read(j, "source", f.source, "feature");
  return f;
}

json model_to_json(const ModelConfig& c) {
  json j;
  j["features"] = json::array();
  for (const auto& f : c.features) {
    j["features"].push_back(feature_to_json(f));
  }
  j["target"] = c.target;
  j["trunk"] = c.trunk;
  j["horizon"] = c.horizon;
  j["lookback"] = c.lookback;
  j["dropout_rate"] = c.dropout_rate;
  j["quantiles"] = c.quantiles;
  return j;
}

ModelConfig model_from_json(const json& j) {
  check_keys(j, {"features", "target", "trunk", "horizon", "lookback", "dropout_rate", "quantiles"}, "model");
  ModelConfig c = desk_config();
  if (j.contains("features")) {
    c.features.clear();
    for (const auto& f : j.at("features")) {
      c.features.push_back(feature_from_json(f));
    }
  }
  read(j, "target", c.target, "model");
  read(j, "trunk", c.trunk, "model");
  read(j, "horizon", c.horizon, "model");
  read(j, "lookback", c.lookback, "model");
  read(j, "dropout_rate", c.dropout_rate, "model");
  read(j, "quantiles", c.quantiles, "model");
  c.validate();
  return c;
}

json train_to_json(const TrainConfig& c) {
  json j;
  j["epochs"] = c.epochs;
  j["minibatch_size"] = c.minibatch_size;
  j["learning_rate"] = c.learning_rate;
  j["seed"] = c.seed;
  j["loss"] = c.loss == LossKind::MSE ? "mse" : "pinball";
  j["quantiles"] = c.quantiles;
  j["shuffle"] = c.shuffle;
  j["clip_norm"] = c.clip_norm;
  return j;
}

TrainConfig train_from_json(const json& j) {
  check_keys(j, {"epochs", "minibatch_size", "learning_rate", "seed", "loss", "quantiles", "shuffle", "clip_norm"},
             "train");
  TrainConfig c = default_run_config().train;
  read(j, "epochs", c.epochs, "train");
  read(j, "minibatch_size", c.minibatch_size, "train");
  read(j, "learning_rate", c.learning_rate, "train");
  read(j, "seed", c.seed, "train");
  std::string loss = "mse";
  read(j, "loss", loss, "train");
  if (loss == "mse") {
    c.loss = LossKind::MSE;
  } else if (loss == "pinball") {
    c.loss = LossKind::Pinball;
  } else {
    throw Error(ErrorCode::InvalidConfig, "train.loss must be 'mse' or 'pinball'");
  }
  read(j, "quantiles", c.quantiles, "train");
  read(j, "shuffle", c.shuffle, "train");
  read(j, "clip_norm", c.clip_norm, "train");
  c.validate();
  return c;
}

json split_to_json(const SplitConfig& c) {
  return json{{"train_fraction", c.train_fraction}, {"dev_fraction", c.dev_fraction}};
}

SplitConfig split_from_json(const json& j) {
  check_keys(j, {"train_fraction", "dev_fraction"}, "split");
  SplitConfig c;
  read(j, "train_fraction", c.train_fraction, "split");
  read(j, "dev_fraction", c.dev_fraction, "split");
  return c;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.model = desk_config();
  c.train.epochs = 20;
  c.train.minibatch_size = 32;
  c.train.learning_rate = 1e-3;
  c.train.seed = 0;
  return c;
}

std::string to_json(const ModelConfig& config) { return model_to_json(config).dump(); }
std::string to_json(const TrainConfig& config) { return train_to_json(config).dump(); }
std::string to_json(const SplitConfig& config) { return split_to_json(config).dump(); }

std::string to_json(const RunConfig& config) {
  json j;
  j["model"] = model_to_json(config.model);
  j["train"] = train_to_json(config.train);
  j["split"] = split_to_json(config.split);
  return j.dump();
}

std::string to_json(const SynthConfig& c) {
  json j;
  j["n_stores"] = c.n_stores;
  j["n_products"] = c.n_products;
  j["n_weeks"] = c.n_weeks;
  j["seed"] = c.seed;
  j["start_date"] = c.start_date;
  j["climate_mean_lo"] = c.climate_mean_lo;
  j["climate_mean_hi"] = c.climate_mean_hi;
  j["amplitude_lo"] = c.amplitude_lo;
  j["amplitude_hi"] = c.amplitude_hi;
  j["anomaly_std"] = c.anomaly_std;
  j["anomaly_persistence"] = c.anomaly_persistence;
  j["diurnal_range"] = c.diurnal_range;
  j["precip_mean"] = c.precip_mean;
  j["precip_std"] = c.precip_std;
  j["n_members"] = c.n_members;
  j["n_leads"] = c.n_leads;
  j["issue_interval"] = c.issue_interval;
  j["member_spread"] = c.member_spread;
  j["mean_error_std"] = c.mean_error_std;
  j["spread_variability"] = c.spread_variability;
  j["base_lo"] = c.base_lo;
  j["base_hi"] = c.base_hi;
  j["seasonal_amplitude"] = c.seasonal_amplitude;
  j["beta"] = c.beta;
  j["noise_std"] = c.noise_std;
  return j.dump();
}

ModelConfig model_config_from_json(std::string_view text) { return model_from_json(parse(text, "model config")); }
TrainConfig train_config_from_json(std::string_view text) { return train_from_json(parse(text, "train config")); }

RunConfig run_config_from_json(std::string_view text) {
  const json j = parse(text, "run config");
  check_keys(j, {"model", "train", "split"}, "run config");
  RunConfig c = default_run_config();
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("train")) c.train = train_from_json(j.at("train"));
  if (j.contains("split")) c.split = split_from_json(j.at("split"));
  return c;
}

SynthConfig synth_config_from_json(std::string_view text) {
  const json j = parse(text, "synth config");
  check_keys(j, {"n_stores", "n_products", "n_weeks", "seed", "start_date", "climate_mean_lo", "climate_mean_hi",
                 "amplitude_lo", "amplitude_hi", "anomaly_std", "anomaly_persistence", "diurnal_range",
                 "precip_mean", "precip_std", "n_members", "n_leads", "issue_interval", "member_spread",
                 "mean_error_std", "spread_variability", "base_lo", "base_hi", "seasonal_amplitude", "beta",
                 "noise_std"},
             "synth config");
  SynthConfig c;
  read(j, "n_stores", c.n_stores, "synth");
  read(j, "n_products", c.n_products, "synth");
  read(j, "n_weeks", c.n_weeks, "synth");
  read(j, "seed", c.seed, "synth");
  read(j, "start_date", c.start_date, "synth");
  read(j, "climate_mean_lo", c.climate_mean_lo, "synth");
  read(j, "climate_mean_hi", c.climate_mean_hi, "synth");
  read(j, "amplitude_lo", c.amplitude_lo, "synth");
  read(j, "amplitude_hi", c.amplitude_hi, "synth");
  read(j, "anomaly_std", c.anomaly_std, "synth");
  read(j, "anomaly_persistence", c.anomaly_persistence, "synth");
  read(j, "diurnal_range", c.diurnal_range, "synth");
  read(j, "precip_mean", c.precip_mean, "synth");
  read(j, "precip_std", c.precip_std, "synth");
  read(j, "n_members", c.n_members, "synth");
  read(j, "n_leads", c.n_leads, "synth");
  read(j, "issue_interval", c.issue_interval, "synth");
  read(j, "member_spread", c.member_spread, "synth");
  read(j, "mean_error_std", c.mean_error_std, "synth");
  read(j, "spread_variability", c.spread_variability, "synth");
  read(j, "base_lo", c.base_lo, "synth");
  read(j, "base_hi", c.base_hi, "synth");
  read(j, "seasonal_amplitude", c.seasonal_amplitude, "synth");
  read(j, "beta", c.beta, "synth");
  read(j, "noise_std", c.noise_std, "synth");
  c.validate();
  return c;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
  }
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t config_hash(const ModelConfig& config) { return fnv1a64(to_json(config)); }

}  // namespace seasoncast
