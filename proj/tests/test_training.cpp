#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "gradcheck.hpp"
#include "seasoncast/error.hpp"
#include "seasoncast/training.hpp"
#include "support.hpp"

using namespace seasoncast;
using doctest::Approx;

namespace {

Sample timed(const std::string& entity, WeekIndex t) {
  Sample s;
  s.entity = entity;
  s.t = t;
  return s;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ParseError;
}

// A small learnable problem: several samples drawn from one random config.
std::vector<Sample> samples_like(const test::RandomCase& rc, Rng& rng, std::size_t n) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s = rc.sample;
    s.t = static_cast<WeekIndex>(i);
    for (auto& w : s.windows) w = test::random_normal(rng, w.size(), 50, 10);
    s.target = test::random_normal(rng, rc.config.horizon, 50, 10);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("pinball loss values") {
  CHECK(pinball_loss(0.5, 10, 8) == Approx(1.0));
  CHECK(pinball_loss(0.9, 10, 8) == Approx(1.8));
  CHECK(pinball_loss(0.9, 8, 10) == Approx(0.2));
  CHECK(pinball_loss(0.3, 4, 4) == 0.0);
  CHECK(code_of([] { pinball_loss(0.0, 1, 2); }) == ErrorCode::InvalidQuantile);
  CHECK(code_of([] { pinball_loss(1.0, 1, 2); }) == ErrorCode::InvalidQuantile);
}

TEST_CASE("pinball is non-negative and zero only at the target") {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double q = uniform(rng, 0.01, 0.99);
    const double y = normal(rng, 0, 10), yhat = normal(rng, 0, 10);
    CHECK(pinball_loss(q, y, yhat) > 0.0);
  }
}

TEST_CASE("median pinball is half the absolute error") {
  Rng rng(32);
  for (int rep = 0; rep < 50; ++rep) {
    const auto y = test::random_normal(rng, 100, 10, 5);
    const auto yhat = test::random_normal(rng, 100, 10, 5);
    double pin = 0.0, abs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      pin += pinball_loss(0.5, y[i], yhat[i]);
      abs += std::fabs(y[i] - yhat[i]);
    }
    CHECK(std::fabs(pin / 100 - 0.5 * abs / 100) <= 1e-12);
  }
}

TEST_CASE("mse loss") {
  CHECK(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(mse_loss(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 1.0);
  CHECK(code_of([] { mse_loss(std::vector<double>{0}, std::vector<double>{1, 1}); }) == ErrorCode::DimensionMismatch);
  Rng rng(33);
  const auto y = test::random_normal(rng, 37), yhat = test::random_normal(rng, 37);
  double ss = 0.0;
  for (std::size_t i = 0; i < 37; ++i) ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  CHECK(mse_loss(y, yhat) == Approx(ss / 37).epsilon(1e-14));
}

TEST_CASE("sample loss requires matching quantiles") {
  Rng rng(34);
  auto rc = test::random_case(rng);
  rc.config.quantiles = {0.1, 0.5, 0.9};
  const LrlSnnModel model(rc.config, 1);
  Rng r(1);
  const auto tr = model.trace(rc.sample, false, r);
  TrainConfig mse;
  CHECK(code_of([&] { sample_loss(tr, rc.sample, rc.config, mse); }) == ErrorCode::ConfigMismatch);
  TrainConfig pin;
  pin.loss = LossKind::Pinball;
  pin.quantiles = {0.5};
  CHECK(code_of([&] { sample_loss(tr, rc.sample, rc.config, pin); }) == ErrorCode::ConfigMismatch);
  pin.quantiles = rc.config.quantiles;
  CHECK(sample_loss(tr, rc.sample, rc.config, pin) >= 0.0);
}

TEST_CASE("chronological split by time cuts") {
  std::vector<Sample> samples;
  for (const char* e : {"A", "B"})
    for (WeekIndex t = 0; t < 10; ++t) samples.push_back(timed(e, t));
  const auto split = chronological_split(samples, {5, 7, 0});
  CHECK(split.train.size() == 12);
  CHECK(split.dev.size() == 4);
  CHECK(split.test.size() == 4);
  for (const auto& s : split.train) CHECK(s.t <= 5);
  for (const auto& s : split.dev) CHECK((s.t > 5 && s.t <= 7));
  for (const auto& s : split.test) CHECK(s.t > 7);
}

TEST_CASE("samples crossing their cut are dropped") {
  std::vector<Sample> samples;
  for (WeekIndex t = 0; t < 20; ++t) samples.push_back(timed("A", t));
  const auto split = chronological_split(samples, {9, 14, 2});
  // Train keeps t <= 7, dev keeps 10..12; 8, 9, 13, 14 would see past their cut.
  CHECK(split.train.size() == 8);
  CHECK(split.dev.size() == 3);
  CHECK(split.test.size() == 5);
  CHECK(split.dropped == 4);
  WeekIndex max_train = 0, min_test = 1000;
  for (const auto& s : split.train) max_train = std::max(max_train, s.t + 2);
  for (const auto& s : split.test) min_test = std::min(min_test, s.t);
  CHECK(max_train < min_test);
}

TEST_CASE("degenerate splits are rejected") {
  std::vector<Sample> samples;
  for (WeekIndex t = 0; t < 5; ++t) samples.push_back(timed("A", t));
  CHECK(code_of([&] { chronological_split(samples, {4, 5, 0}); }) == ErrorCode::DegenerateSplit);
  CHECK(code_of([&] { chronological_split(samples, {3, 3, 0}); }) == ErrorCode::DegenerateSplit);
  CHECK(code_of([&] { chronological_split(samples, {1, 3, 3}); }) == ErrorCode::DegenerateSplit);
}

TEST_CASE("fraction cuts reproduce published split proportions") {
  // 79k / 19k / 61k train/dev/test.
  std::vector<Sample> samples;
  for (WeekIndex t = 0; t < 1590; ++t) samples.push_back(timed("A", t));
  const auto spec = split_by_fractions(samples, 79.0 / 159.0, 19.0 / 159.0, 0);
  const auto split = chronological_split(samples, spec);
  CHECK(split.train.size() == 790);
  CHECK(split.dev.size() == 190);
  CHECK(split.test.size() == 610);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  Rng rng(35);
  auto rc = test::random_case(rng);
  LrlSnnModel model(rc.config, 7);
  const LrlSnnModel before = model;
  const auto data = samples_like(rc, rng, 10);
  TrainConfig tc = rc.train;
  tc.learning_rate = 0.0;
  tc.epochs = 3;
  const auto history = train(model, data, data, tc);
  CHECK(history.epochs.size() == 3);
  const auto a = model.parameters();
  const auto b = before.parameters();
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size(); ++i) CHECK(a[t][i] == b[t][i]);
}

TrainHistory memorize_one() {
  Rng rng(36);
  auto rc = test::random_case(rng);
  rc.config.dropout_rate = 0.0;
  rc.config.quantiles.clear();
  rc.train = TrainConfig{};
  rc.train.learning_rate = 0.01;
  rc.train.epochs = 200;
  LrlSnnModel model(rc.config, 8);
  const std::vector<Sample> one{rc.sample};
  return train(model, one, {}, rc.train);
}

TEST_CASE("a tiny net memorizes one sample") {
  const auto history = memorize_one();
  REQUIRE(history.epochs.size() == 200);
  CHECK(history.epochs.back().train_loss < 1e-3);
}

TEST_CASE("one-sample loss envelope decreases") {
  // Full-batch Adam oscillates around the minimum, so the peak of each
  // 20-epoch block is compared rather than consecutive epochs.
  const auto history = memorize_one();
  double previous_peak = std::numeric_limits<double>::infinity();
  for (std::size_t begin = 5; begin < history.epochs.size(); begin += 20) {
    double peak = 0.0;
    for (std::size_t e = begin; e < std::min(begin + 20, history.epochs.size()); ++e)
      peak = std::max(peak, history.epochs[e].train_loss);
    CHECK(peak <= previous_peak * 1.05);
    previous_peak = peak;
  }
}

TEST_CASE("one-sample loss is non-increasing epoch to epoch after epoch 5") {
  const auto history = memorize_one();
  std::size_t upticks = 0;
  for (std::size_t e = 5; e < history.epochs.size(); ++e)
    upticks += history.epochs[e].train_loss > history.epochs[e - 1].train_loss * 1.05;
  CHECK(upticks == 0);
}

TEST_CASE("training is deterministic and independent of worker count") {
  Rng rng(37);
  auto rc = test::random_case(rng);
  rc.config.dropout_rate = 0.2;
  const auto data = samples_like(rc, rng, 40);
  const auto dev = samples_like(rc, rng, 10);
  TrainConfig tc = rc.train;
  tc.epochs = 4;
  tc.minibatch_size = 8;
  tc.seed = 5;
  LrlSnnModel a(rc.config, 9), b(rc.config, 9), c(rc.config, 9);
  std::ostringstream log;
  const auto ha = train(a, data, dev, tc, &log);
  const auto hb = train(b, data, dev, tc);
  tc.threads = 3;
  const auto hc = train(c, data, dev, tc);
  CHECK(ha.same_losses(hb));
  CHECK(ha.same_losses(hc));
  const auto pa = a.parameters(), pc = c.parameters();
  for (std::size_t t = 0; t < pa.size(); ++t)
    for (std::size_t i = 0; i < pa[t].size(); ++i) CHECK(pa[t][i] == pc[t][i]);
  CHECK(log.str().find("epoch=1 split=train loss=") != std::string::npos);
  CHECK(log.str().find("epoch=4 split=dev loss=") != std::string::npos);
}

TEST_CASE("best dev epoch parameters are restored") {
  Rng rng(38);
  auto rc = test::random_case(rng);
  const auto data = samples_like(rc, rng, 30);
  const auto dev = samples_like(rc, rng, 10);
  TrainConfig tc = rc.train;
  tc.epochs = 6;
  LrlSnnModel model(rc.config, 10);
  const auto h = train(model, data, dev, tc);
  double best = h.epochs[0].dev_loss;
  for (const auto& e : h.epochs) best = std::min(best, e.dev_loss);
  CHECK(h.epochs[h.best_epoch].dev_loss == best);
  CHECK(evaluate_loss(model, dev, tc) == Approx(best).epsilon(1e-12));
}

TEST_CASE("non-finite losses abort with the batch") {
  Rng rng(39);
  auto rc = test::random_case(rng);
  auto data = samples_like(rc, rng, 5);
  data[3].target[0] = std::numeric_limits<double>::infinity();
  LrlSnnModel model(rc.config, 11);
  TrainConfig tc = rc.train;
  tc.epochs = 2;
  try {
    train(model, data, {}, tc);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
    CHECK(std::string(e.what()).find("batch") != std::string::npos);
  }
}

TEST_CASE("train config validation") {
  TrainConfig tc;
  tc.epochs = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = TrainConfig{};
  tc.minibatch_size = 0;
  CHECK_THROWS_AS(tc.validate(), Error);
  tc = TrainConfig{};
  tc.loss = LossKind::Pinball;
  tc.quantiles = {0.5, 1.2};
  CHECK_THROWS_AS(tc.validate(), Error);
  CHECK(TrainConfig{}.epochs == 100);
  CHECK(TrainConfig{}.minibatch_size == 32);
  CHECK(TrainConfig{}.learning_rate == 0.001);
}

}  // TEST_SUITE
