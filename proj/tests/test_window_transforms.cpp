#include <cmath>
#include <limits>
#include <numeric>

#include "doctest.h"
#include "seasoncast/error.hpp"
#include "seasoncast/window_transforms.hpp"
#include "support.hpp"

using namespace seasoncast;
using doctest::Approx;

namespace {

// Independent prefix sum.
std::vector<double> prefix_oracle(double anchor, const std::vector<double>& d) {
  std::vector<double> out{anchor};
  for (double x : d) out.push_back(out.back() + x);
  return out;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double pop_std(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / v.size());
}

}  // namespace

TEST_SUITE("window_transforms") {

TEST_CASE("difference of a short window") {
  const auto d = difference(std::vector<double>{5, 7, 4, 9});
  CHECK(d.values == std::vector<double>{2, -3, 5});
  CHECK(d.meta.anchor == 5);
}

TEST_CASE("difference of a constant window is zeros") {
  for (double c : {0.0, -3.5, 1e6}) {
    const auto d = difference(std::vector<double>{c, c, c});
    CHECK(d.values == std::vector<double>{0, 0});
    CHECK(d.meta.anchor == c);
  }
}

TEST_CASE("difference rejects short or non-finite windows") {
  CHECK_THROWS_AS(difference(std::vector<double>{1.0}), Error);
  try {
    difference(std::vector<double>{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WindowTooShort);
  }
  try {
    difference(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN()});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
}

TEST_CASE("invert_difference reconstructs the window") {
  CHECK(invert_difference(std::vector<double>{2, -3, 5}, {5}) == std::vector<double>{5, 7, 4, 9});
  CHECK(invert_difference(std::vector<double>{}, {3}) == std::vector<double>{3});
}

TEST_CASE("invert_difference matches a prefix-sum oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = test::random_normal(rng, 1 + uniform_index(rng, 30), 0.0, 5.0);
    const double anchor = normal(rng, 0.0, 100.0);
    const auto got = invert_difference(d, {anchor});
    const auto want = prefix_oracle(anchor, d);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == Approx(want[i]).epsilon(1e-14));
  }
}

TEST_CASE("difference round-trips over random windows") {
  Rng rng(12);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto w = test::random_normal(rng, 12, 50.0, 20.0);
    const auto d = difference(w);
    const auto back = invert_difference(d.values, d.meta);
    REQUIRE(back.size() == w.size());
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::fabs(back[i] - w[i]) <= 1e-12);
  }
}

TEST_CASE("difference is translation invariant") {
  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = test::random_normal(rng, 8);
    const double c = normal(rng, 0.0, 10.0);
    std::vector<double> shifted = w;
    for (auto& x : shifted) x += c;
    const auto a = difference(w);
    const auto b = difference(shifted);
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == Approx(b.values[i]).epsilon(1e-9));
    CHECK(b.meta.anchor - a.meta.anchor == Approx(c));
  }
}

TEST_CASE("normalize uses the population standard deviation") {
  const auto n = normalize(std::vector<double>{1, 2, 3});
  CHECK(n.meta.mu == Approx(2.0));
  CHECK(n.meta.sigma == Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
  CHECK(n.values[0] == Approx(-1.224744871391589).epsilon(1e-14));
  CHECK(n.values[1] == Approx(0.0));
  CHECK(n.values[2] == Approx(1.224744871391589).epsilon(1e-14));
  const auto back = invert_normalize(n.values, n.meta);
  for (int i = 0; i < 3; ++i) CHECK(back[i] == Approx(i + 1.0).epsilon(1e-15));
}

TEST_CASE("constant windows normalize to zeros and invert exactly") {
  for (double c : {0.0, 7.25, -1e5}) {
    const auto n = normalize(std::vector<double>{c, c, c});
    CHECK(n.values == std::vector<double>{0, 0, 0});
    CHECK(n.meta.mu == c);
    CHECK(n.meta.sigma == 0.0);
    CHECK(invert_normalize(n.values, n.meta) == std::vector<double>{c, c, c});
  }
}

TEST_CASE("normalized output has zero mean and unit std") {
  Rng rng(14);
  for (int rep = 0; rep < 500; ++rep) {
    const auto w = test::random_normal(rng, 2 + uniform_index(rng, 40), normal(rng, 0, 50), 0.01 + uniform01(rng) * 30);
    if (pop_std(w) <= 1e-6) continue;
    const auto n = normalize(w);
    CHECK(std::fabs(mean_of(n.values)) <= 1e-9);
    CHECK(std::fabs(pop_std(n.values) - 1.0) <= 1e-9);
  }
}

TEST_CASE("normalize round-trips over random windows") {
  Rng rng(15);
  for (int rep = 0; rep < 1000; ++rep) {
    auto w = test::random_normal(rng, 13, 100.0, 25.0);
    if (rep % 10 == 0) std::fill(w.begin(), w.end(), w[0]);
    const auto n = normalize(w);
    const auto back = invert_normalize(n.values, n.meta);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(std::fabs(back[i] - w[i]) <= 1e-9);
  }
}

TEST_CASE("normalize is affine invariant in shape") {
  Rng rng(16);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = test::random_normal(rng, 10);
    const double a = 0.1 + uniform01(rng) * 10.0;
    const double b = normal(rng, 0.0, 20.0);
    std::vector<double> scaled = w;
    for (auto& x : scaled) x = a * x + b;
    const auto n1 = normalize(w);
    const auto n2 = normalize(scaled);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(n1.values[i] == Approx(n2.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("apply_transforms honours the flags") {
  const std::vector<double> w{1, 2, 4, 8};
  SUBCASE("both") {
    const auto t = apply_transforms(w, {true, true});
    const auto d = difference(w);
    const auto n = normalize(d.values);
    CHECK(t.values == n.values);
    CHECK(t.diff.anchor == 1);
    CHECK(t.norm.mu == n.meta.mu);
  }
  SUBCASE("neither") {
    const auto t = apply_transforms(w, {false, false});
    CHECK(t.values == w);
    CHECK(t.norm.mu == 0.0);
    CHECK(t.norm.scale() == 1.0);
  }
  SUBCASE("normalize only") {
    const auto t = apply_transforms(w, {false, true});
    CHECK(t.values == normalize(w).values);
  }
}

}  // TEST_SUITE
