#include "seasoncast/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "seasoncast/error.hpp"
#include "seasoncast/parallel.hpp"

namespace seasoncast {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string skip_cause(ErrorCode code) {
  switch (code) {
    case ErrorCode::InsufficientHistory: return "insufficient_history";
    case ErrorCode::InsufficientForecast: return "insufficient_forecast";
    case ErrorCode::MissingValue: return "missing_value";
    case ErrorCode::UnknownSeries: return "unknown_series";
    default: return std::string(to_string(code));
  }
}

}  // namespace

std::string_view to_string(SeriesKind kind) noexcept {
  switch (kind) {
    case SeriesKind::Observed: return "observed";
    case SeriesKind::Climate: return "climate";
    case SeriesKind::Known: return "known";
  }
  return "observed";
}

SeriesKind parse_series_kind(std::string_view text) {
  if (text == "observed") return SeriesKind::Observed;
  if (text == "climate") return SeriesKind::Climate;
  if (text == "known") return SeriesKind::Known;
  throw Error(ErrorCode::InvalidConfig, "unknown series kind '" + std::string(text) + "'");
}

std::string_view to_string(EnsembleStat stat) noexcept {
  return stat == EnsembleStat::Mean ? "mean" : "std";
}

EnsembleStat parse_ensemble_stat(std::string_view text) {
  if (text == "mean") return EnsembleStat::Mean;
  if (text == "std") return EnsembleStat::Std;
  throw Error(ErrorCode::InvalidConfig, "unknown ensemble statistic '" + std::string(text) + "'");
}

EnsembleStats ensemble_stats(const EnsembleForecast& forecast) {
  if (forecast.n_members < 2) {
    throw Error(ErrorCode::TooFewMembers,
                "ensemble needs at least 2 members, got " + std::to_string(forecast.n_members));
  }
  if (forecast.members.size() != forecast.n_members * forecast.n_leads) {
    throw Error(ErrorCode::DimensionMismatch, "ensemble member grid does not match n_members x n_leads");
  }
  const auto n = static_cast<double>(forecast.n_members);
  EnsembleStats out;
  out.mean.assign(forecast.n_leads, 0.0);
  out.std.assign(forecast.n_leads, 0.0);
  for (std::size_t lead = 0; lead < forecast.n_leads; ++lead) {
    double sum = 0.0;
    for (std::size_t m = 0; m < forecast.n_members; ++m) {
      sum += forecast.at(m, lead);
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t m = 0; m < forecast.n_members; ++m) {
      const double d = forecast.at(m, lead) - mean;
      ss += d * d;
    }
    out.mean[lead] = mean;
    out.std[lead] = std::sqrt(ss / n);
  }
  return out;
}

ClimateIndex::ClimateIndex(std::span<const EnsembleForecast> forecasts) {
  for (const auto& f : forecasts) {
    vintages_[{f.location, f.attribute}].push_back(Vintage{f.issue_week, ensemble_stats(f)});
  }
  for (auto& [key, list] : vintages_) {
    std::stable_sort(list.begin(), list.end(), [](const Vintage& a, const Vintage& b) { return a.issue < b.issue; });
  }
}

std::vector<double> ClimateIndex::as_of(const std::string& location, ClimateAttribute attribute,
                                        EnsembleStat stat, WeekIndex t, WeekIndex first, WeekIndex last) const {
  const auto it = vintages_.find({location, attribute});
  if (it == vintages_.end()) {
    throw Error(ErrorCode::InsufficientForecast,
                "no ensemble forecasts for " + location + "/" + std::string(to_string(attribute)));
  }
  const auto& list = it->second;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max<WeekIndex>(last - first + 1, 0)));
  for (WeekIndex u = first; u <= last; ++u) {
    const WeekIndex cutoff = std::min(u - 1, t);
    // Latest issue <= cutoff; equal issue weeks resolve to the last one listed.
    auto pos = std::upper_bound(list.begin(), list.end(), cutoff,
                                [](WeekIndex value, const Vintage& v) { return value < v.issue; });
    if (pos == list.begin()) {
      throw Error(ErrorCode::InsufficientForecast,
                  "no forecast for " + location + "/" + std::string(to_string(attribute)) + " issued by week " +
                      std::to_string(cutoff));
    }
    const Vintage& v = *std::prev(pos);
    const auto lead = static_cast<std::size_t>(u - v.issue);
    const auto& values = stat == EnsembleStat::Mean ? v.stats.mean : v.stats.std;
    if (lead < 1 || lead > values.size()) {
      throw Error(ErrorCode::InsufficientForecast,
                  "forecast for " + location + "/" + std::string(to_string(attribute)) + " has " +
                      std::to_string(values.size()) + " leads, needs lead " + std::to_string(lead));
    }
    out.push_back(values[lead - 1]);
  }
  return out;
}

WeeklySeries weekly_aggregate(std::span<const DailyPoint> daily, Reducer reducer) {
  if (daily.empty()) {
    throw Error(ErrorCode::EmptySeries, "weekly_aggregate: no daily values");
  }
  std::vector<DailyPoint> points(daily.begin(), daily.end());
  std::sort(points.begin(), points.end(), [](const DailyPoint& a, const DailyPoint& b) { return a.day < b.day; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].day == points[i - 1].day) {
      throw Error(ErrorCode::ParseError, "weekly_aggregate: duplicate day " + format_date(points[i].day));
    }
  }
  const WeekIndex first = week_of_day(points.front().day);
  const WeekIndex last = week_of_day(points.back().day);
  const auto n_weeks = static_cast<std::size_t>(last - first + 1);
  std::vector<double> sums(n_weeks, 0.0);
  std::vector<int> counts(n_weeks, 0);
  for (const auto& p : points) {
    const auto w = static_cast<std::size_t>(week_of_day(p.day) - first);
    sums[w] += p.value;
    counts[w] += 1;
  }
  std::size_t lo = 0;
  while (lo < n_weeks && counts[lo] < 7) {
    ++lo;
  }
  std::size_t hi = n_weeks;
  while (hi > lo && counts[hi - 1] < 7) {
    --hi;
  }
  if (lo == hi) {
    throw Error(ErrorCode::EmptySeries, "weekly_aggregate: no complete week in the input");
  }
  WeeklySeries out;
  out.start = first + static_cast<WeekIndex>(lo);
  out.values.reserve(hi - lo);
  for (std::size_t w = lo; w < hi; ++w) {
    if (counts[w] < 7) {
      out.values.push_back(kNaN);
    } else {
      out.values.push_back(reducer == Reducer::Sum ? sums[w] : sums[w] / 7.0);
    }
  }
  return out;
}

Window build_window(SeriesView series, WeekIndex t, const FeatureSpec& spec, std::size_t lookback) {
  const WeekIndex first = t - static_cast<WeekIndex>(lookback);
  const WeekIndex last = t + static_cast<WeekIndex>(spec.kind == SeriesKind::Observed ? 0 : spec.offset);
  const WeekIndex end = series.start + static_cast<WeekIndex>(series.values.size());
  if (first < series.start) {
    throw Error(ErrorCode::InsufficientHistory,
                spec.id + ": window starting at week " + std::to_string(first) + " crosses the series start");
  }
  if (last >= end) {
    throw Error(spec.kind == SeriesKind::Observed ? ErrorCode::InsufficientHistory : ErrorCode::InsufficientForecast,
                spec.id + ": window ending at week " + std::to_string(last) + " runs past the series end");
  }
  const auto offset = static_cast<std::size_t>(first - series.start);
  Window out(series.values.begin() + static_cast<std::ptrdiff_t>(offset),
             series.values.begin() + static_cast<std::ptrdiff_t>(offset + static_cast<std::size_t>(last - first + 1)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(out[i])) {
      throw Error(ErrorCode::MissingValue,
                  spec.id + ": missing value at week " + std::to_string(first + static_cast<WeekIndex>(i)));
    }
  }
  return out;
}

Sample build_sample(const Dataset& dataset, const ClimateIndex& climate, std::span<const FeatureSpec> features,
                    const std::string& entity, WeekIndex t, std::size_t lookback) {
  Sample sample;
  sample.entity = entity;
  sample.t = t;
  sample.windows.reserve(features.size());
  for (const auto& spec : features) {
    const WeekIndex first = t - static_cast<WeekIndex>(lookback);
    const WeekIndex last = t + static_cast<WeekIndex>(spec.kind == SeriesKind::Observed ? 0 : spec.offset);
    if (spec.kind == SeriesKind::Climate) {
      const auto values = climate.as_of(location_of(entity), spec.attribute, spec.stat, t, first, last);
      sample.windows.push_back(build_window(SeriesView{first, values}, t, spec, lookback));
    } else if (spec.source == kCalendarWeek || spec.source == kCalendarMonth) {
      std::vector<double> values;
      for (WeekIndex w = first; w <= last; ++w) {
        values.push_back(spec.source == kCalendarWeek ? iso_week_number(w) : month_of_week(w));
      }
      sample.windows.push_back(build_window(SeriesView{first, values}, t, spec, lookback));
    } else {
      const WeeklySeries* s = dataset.find(entity, spec.source);
      if (s == nullptr) {
        throw Error(ErrorCode::UnknownSeries, entity + " has no series '" + spec.source + "'");
      }
      sample.windows.push_back(build_window(SeriesView{s->start, s->values}, t, spec, lookback));
    }
  }
  return sample;
}

std::size_t SkipReport::total() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, count] : by_cause) {
    n += count;
  }
  return n;
}

void SkipReport::add(const SkipReport& other) {
  for (const auto& [cause, count] : other.by_cause) {
    by_cause[cause] += count;
  }
}

std::string SkipReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [cause, count] : by_cause) {
    j[cause] = count;
  }
  nlohmann::json doc;
  doc["skipped"] = j;
  doc["total"] = total();
  return doc.dump(2) + "\n";
}

SampleSet assemble_samples(const Dataset& dataset, std::span<const FeatureSpec> features,
                           const std::string& target_series, std::size_t lookback, std::size_t horizon,
                           const AssembleOptions& options) {
  const ClimateIndex climate(dataset.ensembles);
  const auto entities = dataset.entities();
  std::vector<SampleSet> per_entity(entities.size());

  parallel_for(entities.size(), options.threads, [&](std::size_t e) {
    const auto& entity = entities[e];
    auto& result = per_entity[e];
    const WeeklySeries* target = dataset.find(entity, target_series);
    if (target == nullptr) {
      result.skipped.by_cause["unknown_series"] += 1;
      return;
    }
    const auto k = static_cast<WeekIndex>(lookback);
    const auto tau = static_cast<WeekIndex>(horizon);
    const WeekIndex t_first = target->start + k;
    const WeekIndex t_last = target->end() - 1 - (options.require_target ? tau : 0);
    for (WeekIndex t = t_first; t <= t_last; ++t) {
      Sample sample;
      try {
        sample = build_sample(dataset, climate, features, entity, t, lookback);
      } catch (const Error& err) {
        result.skipped.by_cause[skip_cause(err.code())] += 1;
        continue;
      }
      if (options.require_target) {
        sample.target.reserve(horizon);
        bool ok = true;
        for (WeekIndex h = 1; h <= tau; ++h) {
          const double y = target->at(t + h);
          ok = ok && std::isfinite(y);
          sample.target.push_back(y);
        }
        if (!ok) {
          result.skipped.by_cause["missing_target"] += 1;
          continue;
        }
      }
      result.samples.push_back(std::move(sample));
    }
  });

  SampleSet out;
  for (auto& part : per_entity) {
    out.skipped.add(part.skipped);
    std::move(part.samples.begin(), part.samples.end(), std::back_inserter(out.samples));
  }
  return out;
}

}  // namespace seasoncast
