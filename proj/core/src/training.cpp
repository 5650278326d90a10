#include "seasoncast/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "seasoncast/error.hpp"
#include "seasoncast/parallel.hpp"

namespace seasoncast {
namespace {

void check_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw Error(ErrorCode::InvalidQuantile, "quantile must lie in (0, 1), got " + std::to_string(q));
  }
}

std::vector<std::vector<double>> snapshot(const LrlSnnModel& model) {
  std::vector<std::vector<double>> out;
  for (auto t : model.parameters()) {
    out.emplace_back(t.begin(), t.end());
  }
  return out;
}

void restore(LrlSnnModel& model, const std::vector<std::vector<double>>& saved) {
  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(saved[i].begin(), saved[i].end(), params[i].begin());
  }
}

std::string format_record(const EpochRecord& r, const char* split, double loss) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%zu split=%s loss=%.17g seconds=%.3f\n", r.epoch, split, loss, r.seconds);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (minibatch_size < 1) throw Error(ErrorCode::InvalidConfig, "minibatch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be >= 0");
  if (!(clip_norm > 0.0)) throw Error(ErrorCode::InvalidConfig, "clip_norm must be positive");
  if (loss == LossKind::Pinball && quantiles.empty()) {
    throw Error(ErrorCode::InvalidConfig, "pinball loss needs at least one quantile");
  }
  for (double q : quantiles) {
    check_quantile(q);
  }
}

double pinball_loss(double q, double y, double yhat) {
  check_quantile(q);
  return y >= yhat ? q * (y - yhat) : (1.0 - q) * (yhat - y);
}

double mse_loss(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mse_loss: length " + std::to_string(y.size()) + " vs " +
                                                  std::to_string(yhat.size()));
  }
  if (y.empty()) {
    return 0.0;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - yhat[i];
    ss += r * r;
  }
  return ss / static_cast<double>(y.size());
}

double sample_loss(const ForwardTrace& trace, const Sample& sample, const ModelConfig& model,
                   const TrainConfig& config, std::vector<double>* grad_raw) {
  const std::size_t tau = model.horizon;
  if (sample.target.size() != tau) {
    throw Error(ErrorCode::DimensionMismatch, "sample target has " + std::to_string(sample.target.size()) +
                                                  " values, horizon is " + std::to_string(tau));
  }
  const bool pinball = config.loss == LossKind::Pinball;
  if (pinball != !model.quantiles.empty() || (pinball && config.quantiles != model.quantiles)) {
    throw Error(ErrorCode::ConfigMismatch, "training loss does not match the model's quantile outputs");
  }
  const std::size_t nq = model.quantile_count();
  const double scale = trace.output.loss_scale();
  const double weight = 1.0 / static_cast<double>(tau * nq);
  if (grad_raw != nullptr) {
    grad_raw->assign(trace.raw.size(), 0.0);
  }
  double loss = 0.0;
  std::vector<double> grad_levels(tau);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto levels = trace.output.to_levels(std::span<const double>(trace.raw).subspan(q * tau, tau));
    for (std::size_t j = 0; j < tau; ++j) {
      const double y = sample.target[j] / scale;
      const double yhat = levels[j] / scale;
      if (pinball) {
        const double level = model.quantiles[q];
        loss += weight * pinball_loss(level, y, yhat);
        grad_levels[j] = weight * (y >= yhat ? -level : 1.0 - level) / scale;
      } else {
        const double r = yhat - y;
        loss += weight * r * r;
        grad_levels[j] = weight * 2.0 * r / scale;
      }
    }
    if (grad_raw != nullptr) {
      const auto g = trace.output.levels_grad_to_raw(grad_levels);
      std::copy(g.begin(), g.end(), grad_raw->begin() + static_cast<std::ptrdiff_t>(q * tau));
    }
  }
  return loss;
}

double evaluate_loss(const LrlSnnModel& model, std::span<const Sample> samples, const TrainConfig& config) {
  if (samples.empty()) {
    return 0.0;
  }
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), config.threads, [&](std::size_t i) {
    Rng unused(0);
    const auto tr = model.trace(samples[i], false, unused);
    losses[i] = sample_loss(tr, samples[i], model.config(), config);
  });
  double total = 0.0;
  for (double l : losses) {
    total += l;
  }
  return total / static_cast<double>(samples.size());
}

SplitResult chronological_split(std::vector<Sample> samples, const SplitSpec& spec) {
  if (!(spec.train_end < spec.dev_end)) {
    throw Error(ErrorCode::DegenerateSplit, "train cut must precede the dev cut");
  }
  const auto h = static_cast<WeekIndex>(spec.horizon);
  SplitResult out;
  for (auto& s : samples) {
    if (s.t <= spec.train_end) {
      if (s.t + h <= spec.train_end) {
        out.train.push_back(std::move(s));
      } else {
        ++out.dropped;
      }
    } else if (s.t <= spec.dev_end) {
      if (s.t + h <= spec.dev_end) {
        out.dev.push_back(std::move(s));
      } else {
        ++out.dropped;
      }
    } else {
      out.test.push_back(std::move(s));
    }
  }
  if (out.train.empty() || out.dev.empty() || out.test.empty()) {
    throw Error(ErrorCode::DegenerateSplit, "split produced train/dev/test sizes " +
                                                std::to_string(out.train.size()) + "/" +
                                                std::to_string(out.dev.size()) + "/" +
                                                std::to_string(out.test.size()));
  }
  return out;
}

SplitSpec split_by_fractions(std::span<const Sample> samples, double train_fraction, double dev_fraction,
                             std::size_t horizon) {
  if (!(train_fraction > 0.0 && dev_fraction > 0.0 && train_fraction + dev_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "split fractions must be positive and leave room for a test set");
  }
  std::set<WeekIndex> distinct;
  for (const auto& s : samples) {
    distinct.insert(s.t);
  }
  if (distinct.size() < 3) {
    throw Error(ErrorCode::DegenerateSplit, "need at least 3 distinct sample times to split");
  }
  const std::vector<WeekIndex> times(distinct.begin(), distinct.end());
  const auto n = static_cast<double>(times.size());
  auto cut = [&](double fraction) {
    const auto count = static_cast<std::size_t>(std::ceil(n * fraction - 1e-9));
    return times[std::clamp<std::size_t>(count, 1, times.size() - 1) - 1];
  };
  SplitSpec spec;
  spec.train_end = cut(train_fraction);
  spec.dev_end = cut(train_fraction + dev_fraction);
  spec.horizon = horizon;
  return spec;
}

bool TrainHistory::same_losses(const TrainHistory& other) const noexcept {
  if (best_epoch != other.best_epoch || epochs.size() != other.epochs.size()) {
    return false;
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& a = epochs[i];
    const auto& b = other.epochs[i];
    if (a.epoch != b.epoch || a.train_loss != b.train_loss || a.dev_loss != b.dev_loss) {
      return false;
    }
  }
  return true;
}

TrainHistory train(LrlSnnModel& model, std::span<const Sample> train_set, std::span<const Sample> dev_set,
                   const TrainConfig& config, std::ostream* log) {
  config.validate();
  if (train_set.empty()) {
    throw Error(ErrorCode::DegenerateSplit, "training set is empty");
  }
  const std::size_t batch = std::min(config.minibatch_size, train_set.size());
  Adam adam(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
  Rng shuffle_rng(derive_seed(config.seed, 0x5f1e));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<ModelGrad> item_grads(batch, model.zero_grad());
  std::vector<double> item_losses(batch);
  ModelGrad total = model.zero_grad();
  auto params = model.parameters();
  auto total_tensors = total.tensors();

  TrainHistory history;
  double best_loss = std::numeric_limits<double>::infinity();
  auto best_params = snapshot(model);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    if (config.shuffle) {
      shuffle(std::span<std::size_t>(order), shuffle_rng);
    }
    double epoch_loss = 0.0;
    const std::size_t n_batches = (order.size() + batch - 1) / batch;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const std::size_t begin = b * batch;
      const std::size_t count = std::min(batch, order.size() - begin);
      parallel_for(count, config.threads, [&](std::size_t i) {
        const std::size_t index = order[begin + i];
        auto& g = item_grads[i];
        g.zero();
        Rng dropout_rng(derive_seed(config.seed, epoch, index));
        const auto tr = model.trace(train_set[index], true, dropout_rng);
        std::vector<double> grad_raw;
        try {
          item_losses[i] = sample_loss(tr, train_set[index], model.config(), config, &grad_raw);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NonFinite) {
            throw;
          }
          throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch) + " batch " + std::to_string(b) +
                                                    " sample " + std::to_string(index) + ": " + e.what());
        }
        for (auto& v : grad_raw) {
          v /= static_cast<double>(count);
        }
        model.backward(tr, grad_raw, g);
      });
      total.zero();
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        total.add(item_grads[i]);
        batch_loss += item_losses[i];
      }
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + " produced a non-finite loss");
      }
      epoch_loss += batch_loss;
      clip_global_norm(total_tensors, config.clip_norm);
      adam.step(params, total_tensors);
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = epoch_loss / static_cast<double>(train_set.size());
    record.dev_loss = dev_set.empty() ? record.train_loss : evaluate_loss(model, dev_set, config);
    record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (!std::isfinite(record.dev_loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch) + " produced a non-finite dev loss");
    }
    history.epochs.push_back(record);
    if (log != nullptr) {
      *log << format_record(record, "train", record.train_loss);
      if (!dev_set.empty()) {
        *log << format_record(record, "dev", record.dev_loss);
      }
    }
    if (record.dev_loss < best_loss) {
      best_loss = record.dev_loss;
      history.best_epoch = history.epochs.size() - 1;
      best_params = snapshot(model);
    }
  }
  restore(model, best_params);
  return history;
}

}  // namespace seasoncast
