#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seasoncast/dataset.hpp"
#include "seasoncast/features.hpp"
#include "seasoncast/model.hpp"

namespace seasoncast {

/// Non-learned comparators for the ablation harness.
enum class BaselineKind { Persistence, SeasonalNaive };

std::string_view to_string(BaselineKind kind) noexcept;
BaselineKind parse_baseline_kind(std::string_view text);

inline constexpr std::size_t kWeeksPerSeason = 52;

/// Persistence repeats y(t); seasonal-naive uses y(t + j - period) and falls
/// back to y(t) wherever that value is unavailable (counted in `fallbacks`).
std::vector<Forecast> baseline_forecasts(BaselineKind kind, const Dataset& dataset, const std::string& target_series,
                                         std::span<const Sample> samples, std::size_t horizon,
                                         std::size_t period = kWeeksPerSeason, std::size_t* fallbacks = nullptr);

}  // namespace seasoncast
