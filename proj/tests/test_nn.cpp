#include <cmath>

#include "doctest.h"
#include "seasoncast/error.hpp"
#include "seasoncast/nn.hpp"
#include "support.hpp"

using namespace seasoncast;
using doctest::Approx;

namespace {

DenseLayer square_layer(std::size_t n, double diag, Activation act) {
  DenseLayer l{n, n, std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0), act};
  for (std::size_t i = 0; i < n; ++i) l.weights[i * n + i] = diag;
  return l;
}

Mlp random_mlp(Rng& rng, std::size_t in, const std::vector<std::size_t>& sizes, double dropout = 0.0) {
  std::vector<DenseLayer> layers;
  std::size_t prev = in;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    DenseLayer l;
    l.in_dim = prev;
    l.out_dim = sizes[i];
    l.weights = test::random_normal(rng, prev * sizes[i], 0.0, 0.1 * 3);
    l.biases = test::random_normal(rng, sizes[i], 0.0, 0.1);
    l.activation = i + 1 == sizes.size() ? Activation::Identity : Activation::ReLU;
    layers.push_back(std::move(l));
    prev = sizes[i];
  }
  return Mlp(in, std::move(layers), dropout);
}

// Straight-line evaluation without dropout.
std::vector<double> oracle_forward(const Mlp& mlp, std::vector<double> x) {
  for (const auto& l : mlp.layers()) {
    std::vector<double> y(l.out_dim);
    for (std::size_t o = 0; o < l.out_dim; ++o) {
      double s = l.biases[o];
      for (std::size_t i = 0; i < l.in_dim; ++i) s += l.weights[o * l.in_dim + i] * x[i];
      y[o] = l.activation == Activation::ReLU ? std::max(0.0, s) : s;
    }
    x = std::move(y);
  }
  return x;
}

double weighted_sum(const std::vector<double>& out, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * c[i];
  return s;
}

}  // namespace

TEST_SUITE("nn_core") {

TEST_CASE("identity layer passes its input through") {
  const Mlp mlp(3, {square_layer(3, 1.0, Activation::Identity)}, 0.0);
  Rng rng(1);
  const std::vector<double> x{1.5, -2.0, 0.25};
  CHECK(mlp.forward(x, false, rng) == x);
}

TEST_CASE("ReLU with negated identity zeroes positive inputs") {
  const Mlp mlp(3, {square_layer(3, -1.0, Activation::ReLU)}, 0.0);
  Rng rng(1);
  CHECK(mlp.forward(std::vector<double>{1, 2, 3}, false, rng) == std::vector<double>{0, 0, 0});
}

TEST_CASE("empty layer list is a passthrough") {
  const Mlp mlp(4, {}, 0.0);
  Rng rng(1);
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(mlp.forward(x, true, rng) == x);
  CHECK(mlp.output_dim() == 4);
  CHECK(mlp.parameter_count() == 0);
}

TEST_CASE("forward matches a matrix-multiply oracle") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    const Mlp mlp = random_mlp(rng, 7, {9, 5, 3});
    const auto x = test::random_normal(rng, 7);
    const auto got = mlp.forward(x, false, rng);
    const auto want = oracle_forward(mlp, x);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("dimension errors") {
  Rng rng(3);
  const Mlp mlp = random_mlp(rng, 4, {3});
  CHECK_THROWS_AS(mlp.forward(std::vector<double>{1, 2}, false, rng), Error);
  DenseLayer a = square_layer(3, 1.0, Activation::ReLU);
  DenseLayer b = square_layer(2, 1.0, Activation::Identity);
  try {
    Mlp bad(3, {a, b}, 0.0);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
  MlpCache cache;
  mlp.forward(std::vector<double>{1, 2, 3, 4}, false, rng, &cache);
  MlpGrad g = mlp.zero_grad();
  CHECK_THROWS_AS(mlp.backward(cache, std::vector<double>{1, 2}, g), Error);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  Rng rng(4);
  const Mlp mlp = random_mlp(rng, 5, {6, 4});
  MlpCache cache;
  mlp.forward(test::random_normal(rng, 5), false, rng, &cache);
  MlpGrad g = mlp.zero_grad();
  mlp.backward(cache, std::vector<double>(4, 0.0), g);
  for (const auto& l : g.layers) {
    for (double w : l.weights) CHECK(w == 0.0);
    for (double b : l.biases) CHECK(b == 0.0);
  }
}

TEST_CASE("linear layer weight gradient row equals the input") {
  Rng rng(5);
  const Mlp mlp = random_mlp(rng, 4, {3});
  const auto x = test::random_normal(rng, 4);
  MlpCache cache;
  mlp.forward(x, false, rng, &cache);
  MlpGrad g = mlp.zero_grad();
  mlp.backward(cache, std::vector<double>{1, 0, 0}, g);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(g.layers[0].weights[i] == x[i]);
    CHECK(g.layers[0].weights[4 + i] == 0.0);
  }
  CHECK(g.layers[0].biases == std::vector<double>{1, 0, 0});
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(6);
  const double h = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t in = 2 + uniform_index(rng, 5);
    std::vector<std::size_t> sizes;
    const std::size_t depth = 1 + uniform_index(rng, 3);
    for (std::size_t d = 0; d < depth; ++d) sizes.push_back(2 + uniform_index(rng, 5));
    const bool use_dropout = rep % 2 == 1;
    Mlp mlp = random_mlp(rng, in, sizes, use_dropout ? 0.3 : 0.0);
    const auto x = test::random_normal(rng, in);
    const auto c = test::random_normal(rng, sizes.back());
    const std::uint64_t mask_seed = 1000 + rep;

    auto loss = [&](const std::vector<double>& input) {
      Rng r(mask_seed);
      return weighted_sum(mlp.forward(input, use_dropout, r), c);
    };
    Rng r(mask_seed);
    MlpCache cache;
    mlp.forward(x, use_dropout, r, &cache);
    MlpGrad g = mlp.zero_grad();
    const auto gx = mlp.backward(cache, c, g);

    std::vector<std::span<double>> params, grads;
    mlp.collect_parameters(params);
    Mlp::collect_gradients(g, grads);
    REQUIRE(params.size() == grads.size());
    for (std::size_t t = 0; t < params.size(); ++t) {
      for (std::size_t i = 0; i < params[t].size(); ++i) {
        const double keep = params[t][i];
        params[t][i] = keep + h;
        const double up = loss(x);
        params[t][i] = keep - h;
        const double down = loss(x);
        params[t][i] = keep;
        CHECK(test::relative_error(grads[t][i], (up - down) / (2 * h)) <= 1e-4);
      }
    }
    for (std::size_t i = 0; i < in; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      CHECK(test::relative_error(gx[i], (loss(xp) - loss(xm)) / (2 * h)) <= 1e-4);
    }
  }
}

TEST_CASE("create uses He-uniform weights and zero biases") {
  Rng rng(7);
  const std::vector<std::size_t> sizes{50, 10};
  const Mlp mlp = Mlp::create(200, sizes, 0.2, rng);
  const double limit = std::sqrt(6.0 / 200.0);
  for (double w : mlp.layers()[0].weights) CHECK(std::fabs(w) <= limit);
  for (double b : mlp.layers()[0].biases) CHECK(b == 0.0);
  CHECK(mlp.layers()[0].activation == Activation::ReLU);
  CHECK(mlp.layers()[1].activation == Activation::Identity);
  CHECK(mlp.parameter_count() == 200 * 50 + 50 + 50 * 10 + 10);
}

TEST_CASE("dropout is off at inference and inverted during training") {
  Rng init(8);
  const std::vector<std::size_t> sizes{400, 1};
  const Mlp mlp = Mlp::create(3, sizes, 0.25, init);
  const auto x = test::random_normal(init, 3);
  Rng a(1), b(2);
  CHECK(mlp.forward(x, false, a) == mlp.forward(x, false, b));

  MlpCache cache;
  Rng r(3);
  mlp.forward(x, true, r, &cache);
  REQUIRE(cache.masks.size() == 2);
  std::size_t dropped = 0;
  for (double m : cache.masks[0]) {
    CHECK((m == 0.0 || m == Approx(1.0 / 0.75)));
    dropped += m == 0.0;
  }
  CHECK(dropped > 60);
  CHECK(dropped < 140);
  CHECK(cache.masks[1].empty());
}

TEST_CASE("dropout rate must lie in [0, 1)") {
  CHECK_THROWS_AS(Mlp(2, {square_layer(2, 1.0, Activation::Identity)}, 1.0), Error);
  CHECK_THROWS_AS(Mlp(2, {square_layer(2, 1.0, Activation::Identity)}, -0.1), Error);
}

TEST_CASE("Adam with zero gradient leaves parameters unchanged") {
  std::vector<double> p{1.0, -2.0, 3.0};
  std::vector<double> g(3, 0.0);
  Adam adam;
  std::vector<std::span<double>> ps{p}, gs{g};
  adam.step(ps, gs);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
  CHECK(adam.steps() == 1);
}

TEST_CASE("Adam first step has the closed form") {
  const double lr = 0.01;
  std::vector<double> p{0.0, 0.0, 0.0};
  std::vector<double> g{0.5, -3.0, 1e-3};
  Adam adam({lr, 0.9, 0.999, 1e-8});
  std::vector<std::span<double>> ps{p}, gs{g};
  adam.step(ps, gs);
  for (std::size_t i = 0; i < 3; ++i) {
    // m_hat = g, v_hat = g^2 after bias correction.
    CHECK(p[i] == Approx(-lr * g[i] / (std::fabs(g[i]) + 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("Adam descends a quadratic bowl") {
  Rng rng(9);
  std::vector<double> p = test::random_normal(rng, 10, 0.0, 3.0);
  std::vector<double> g(10);
  Adam adam({0.05});
  std::vector<std::span<double>> ps{p}, gs{g};
  auto norm = [&] {
    double s = 0;
    for (double x : p) s += x * x;
    return std::sqrt(s);
  };
  const double start = norm();
  double prev = start;
  for (int step = 0; step < 100; ++step) {
    g = p;  // gradient of 0.5 |p|^2
    adam.step(ps, gs);
    const double now = norm();
    if (step >= 5) CHECK(now < prev);
    prev = now;
  }
  CHECK(prev < 0.5 * start);
}

TEST_CASE("Adam is deterministic") {
  auto run = [] {
    Rng rng(10);
    std::vector<double> p = test::random_normal(rng, 20);
    std::vector<double> g(20);
    Adam adam;
    std::vector<std::span<double>> ps{p}, gs{g};
    for (int s = 0; s < 30; ++s) {
      g = test::random_normal(rng, 20);
      adam.step(ps, gs);
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{3.0, 0.0};
  std::vector<double> b{4.0};
  std::vector<std::span<double>> ts{a, b};
  CHECK(global_norm(ts) == Approx(5.0));
  CHECK(clip_global_norm(ts, 10.0) == Approx(5.0));
  CHECK(a[0] == 3.0);
  CHECK(clip_global_norm(ts, 1.0) == Approx(5.0));
  CHECK(global_norm(ts) == Approx(1.0));
  CHECK(a[0] == Approx(0.6));
  CHECK(b[0] == Approx(0.8));
}

TEST_CASE("gradient accumulation adds") {
  Rng rng(11);
  const Mlp mlp = random_mlp(rng, 3, {2});
  MlpCache cache;
  mlp.forward(std::vector<double>{1, 2, 3}, false, rng, &cache);
  MlpGrad once = mlp.zero_grad();
  mlp.backward(cache, std::vector<double>{1, 1}, once);
  MlpGrad twice = mlp.zero_grad();
  mlp.backward(cache, std::vector<double>{1, 1}, twice);
  mlp.backward(cache, std::vector<double>{1, 1}, twice);
  MlpGrad sum = mlp.zero_grad();
  sum.add(once);
  sum.add(once);
  CHECK(sum.layers[0].weights == twice.layers[0].weights);
  sum.zero();
  for (double w : sum.layers[0].weights) CHECK(w == 0.0);
}

}  // TEST_SUITE
