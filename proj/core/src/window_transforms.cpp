#include "seasoncast/window_transforms.hpp"

#include <cmath>
#include <string>

#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFinite, std::string(what) + ": window contains a non-finite value");
    }
  }
}

}  // namespace

Differenced difference(std::span<const double> window) {
  if (window.size() < 2) {
    throw Error(ErrorCode::WindowTooShort,
                "difference needs at least 2 values, got " + std::to_string(window.size()));
  }
  require_finite(window, "difference");
  Differenced out;
  out.meta.anchor = window.front();
  out.values.resize(window.size() - 1);
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    out.values[i] = window[i + 1] - window[i];
  }
  return out;
}

Window invert_difference(std::span<const double> deltas, DiffMeta meta) {
  require_finite(deltas, "invert_difference");
  if (!std::isfinite(meta.anchor)) {
    throw Error(ErrorCode::NonFinite, "invert_difference: anchor is not finite");
  }
  Window out(deltas.size() + 1);
  double level = meta.anchor;
  out[0] = level;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    level += deltas[i];
    out[i + 1] = level;
  }
  return out;
}

Normalized normalize(std::span<const double> window) {
  if (window.empty()) {
    throw Error(ErrorCode::WindowTooShort, "normalize needs at least 1 value");
  }
  require_finite(window, "normalize");
  const auto n = static_cast<double>(window.size());
  double mean = 0.0;
  for (double v : window) {
    mean += v;
  }
  mean /= n;
  double ss = 0.0;
  for (double v : window) {
    ss += (v - mean) * (v - mean);
  }
  Normalized out;
  out.meta.mu = mean;
  out.meta.sigma = std::sqrt(ss / n);
  const double scale = out.meta.scale();
  out.values.resize(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    out.values[i] = (window[i] - mean) / scale;
  }
  return out;
}

Window invert_normalize(std::span<const double> normalized, NormMeta meta) {
  const double scale = meta.scale();
  Window out(normalized.size());
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    out[i] = normalized[i] * scale + meta.mu;
  }
  return out;
}

TransformedWindow apply_transforms(std::span<const double> window, TransformFlags flags) {
  TransformedWindow out;
  out.norm = NormMeta{0.0, 1.0};
  if (flags.apply_diff) {
    auto d = difference(window);
    out.diff = d.meta;
    out.values = std::move(d.values);
  } else {
    require_finite(window, "apply_transforms");
    out.values.assign(window.begin(), window.end());
  }
  if (flags.apply_norm) {
    auto n = normalize(out.values);
    out.norm = n.meta;
    out.values = std::move(n.values);
  }
  return out;
}

}  // namespace seasoncast
