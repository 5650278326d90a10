#include "seasoncast/baselines.hpp"

#include <cmath>

#include "seasoncast/error.hpp"

namespace seasoncast {

std::string_view to_string(BaselineKind kind) noexcept {
  return kind == BaselineKind::Persistence ? "persistence" : "seasonal-naive";
}

BaselineKind parse_baseline_kind(std::string_view text) {
  if (text == "persistence") return BaselineKind::Persistence;
  if (text == "seasonal-naive") return BaselineKind::SeasonalNaive;
  throw Error(ErrorCode::InvalidConfig,
              "unknown baseline '" + std::string(text) + "', expected persistence or seasonal-naive");
}

std::vector<Forecast> baseline_forecasts(BaselineKind kind, const Dataset& dataset, const std::string& target_series,
                                         std::span<const Sample> samples, std::size_t horizon, std::size_t period,
                                         std::size_t* fallbacks) {
  if (period == 0) {
    throw Error(ErrorCode::InvalidConfig, "seasonal period must be positive");
  }
  std::size_t fallback_count = 0;
  std::vector<Forecast> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const WeeklySeries* series = dataset.find(s.entity, target_series);
    if (series == nullptr) {
      throw Error(ErrorCode::UnknownSeries, s.entity + " has no series '" + target_series + "'");
    }
    const double last = series->at(s.t);
    if (!std::isfinite(last)) {
      throw Error(ErrorCode::MissingValue, s.entity + ": no observed value at week " + std::to_string(s.t));
    }
    Forecast f;
    f.entity = s.entity;
    f.t = s.t;
    std::vector<double> values(horizon, last);
    if (kind == BaselineKind::SeasonalNaive) {
      for (std::size_t j = 1; j <= horizon; ++j) {
        // Step back whole seasons until the week is at or before t.
        WeekIndex week = s.t + static_cast<WeekIndex>(j);
        while (week > s.t) {
          week -= static_cast<WeekIndex>(period);
        }
        const double v = series->at(week);
        if (std::isfinite(v)) {
          values[j - 1] = v;
        } else {
          ++fallback_count;
        }
      }
    }
    f.values.push_back(std::move(values));
    out.push_back(std::move(f));
  }
  if (fallbacks != nullptr) {
    *fallbacks = fallback_count;
  }
  return out;
}

}  // namespace seasoncast
