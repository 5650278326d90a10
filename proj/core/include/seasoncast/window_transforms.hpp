#pragma once

#include <algorithm>
#include <span>
#include <vector>

namespace seasoncast {

/// A fixed-length slice of one series, in series units.
using Window = std::vector<double>;

/// Floor applied to the window standard deviation before dividing, so that
/// constant windows normalize to zeros and still invert exactly.
inline constexpr double kNormEpsilon = 1e-6;

struct DiffMeta {
  double anchor = 0.0;  // first element of the window before differencing
};

struct NormMeta {
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation (divisor n)

  double scale() const noexcept { return std::max(sigma, kNormEpsilon); }
};

struct Differenced {
  Window values;
  DiffMeta meta;
};

struct Normalized {
  Window values;
  NormMeta meta;
};

/// Consecutive deltas x[i+1] - x[i]. Throws WindowTooShort below two values.
Differenced difference(std::span<const double> window);

/// Prefix-sum reconstruction: out[0] = anchor, out[i] = anchor + sum(d[0..i)).
Window invert_difference(std::span<const double> deltas, DiffMeta meta);

/// Standardizes by the window mean and population std (floored at kNormEpsilon).
Normalized normalize(std::span<const double> window);

Window invert_normalize(std::span<const double> normalized, NormMeta meta);

/// Which of the two layers a feature pipeline applies. Differencing always
/// runs first; inversion runs in the opposite order.
struct TransformFlags {
  bool apply_diff = true;
  bool apply_norm = true;
};

struct TransformedWindow {
  Window values;
  DiffMeta diff;   // meaningful only when flags.apply_diff
  NormMeta norm;   // identity (mu 0, sigma 1) when !flags.apply_norm
};

TransformedWindow apply_transforms(std::span<const double> window, TransformFlags flags);

}  // namespace seasoncast
