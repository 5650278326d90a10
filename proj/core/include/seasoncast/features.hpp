#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seasoncast/calendar.hpp"
#include "seasoncast/dataset.hpp"
#include "seasoncast/window_transforms.hpp"

namespace seasoncast {

enum class SeriesKind { Observed, Climate, Known };
enum class EnsembleStat { Mean, Std };

std::string_view to_string(SeriesKind kind) noexcept;
SeriesKind parse_series_kind(std::string_view text);
std::string_view to_string(EnsembleStat stat) noexcept;
EnsembleStat parse_ensemble_stat(std::string_view text);

inline constexpr std::string_view kCalendarWeek = "calendar:week";
inline constexpr std::string_view kCalendarMonth = "calendar:month";

/// One input feature of the model.
///
/// Observed windows end at t; Climate and Known windows run `offset` weeks
/// past t. `source` names the series in the data file for Observed/Known
/// features, or one of the calendar generators above; Climate features read
/// the ensemble statistic (`attribute`, `stat`) at the entity's location.
/// `encoder` lists the temporal-encoder layer sizes (empty: passthrough).
struct FeatureSpec {
  std::string id;
  SeriesKind kind = SeriesKind::Observed;
  std::size_t offset = 0;
  TransformFlags transforms;
  std::string source;
  ClimateAttribute attribute = ClimateAttribute::TAvg;
  EnsembleStat stat = EnsembleStat::Mean;
  std::vector<std::size_t> encoder;

  std::size_t window_length(std::size_t lookback) const noexcept {
    return lookback + 1 + (kind == SeriesKind::Observed ? 0 : offset);
  }
};

// ---------------------------------------------------------------------------
// Ensembles

struct EnsembleStats {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation across members
};

/// Per-lead mean and std across members. Throws TooFewMembers below 2.
EnsembleStats ensemble_stats(const EnsembleForecast& forecast);

/// Ensemble statistics for every issued forecast, grouped by
/// (location, attribute) and sorted by issue week.
class ClimateIndex {
 public:
  ClimateIndex() = default;
  explicit ClimateIndex(std::span<const EnsembleForecast> forecasts);

  /// Values of `stat` for weeks [first, last] as known at week t.
  ///
  /// Week u is read from the latest vintage issued at or before
  /// min(u - 1, t), at lead u - issue. Weeks after t therefore all come from
  /// the latest forecast available at t, and earlier weeks from the forecast
  /// that was current just before them. Throws InsufficientForecast when no
  /// such vintage exists or its leads stop short.
  std::vector<double> as_of(const std::string& location, ClimateAttribute attribute,
                            EnsembleStat stat, WeekIndex t, WeekIndex first, WeekIndex last) const;

  bool empty() const noexcept { return vintages_.empty(); }

 private:
  struct Vintage {
    WeekIndex issue = 0;
    EnsembleStats stats;
  };
  std::map<std::pair<std::string, ClimateAttribute>, std::vector<Vintage>> vintages_;
};

// ---------------------------------------------------------------------------
// Weekly aggregation

enum class Reducer { Sum, Mean };

struct DailyPoint {
  DayIndex day = 0;
  double value = 0.0;
};

/// Buckets daily values into Monday-start ISO weeks. Partial leading and
/// trailing weeks are dropped; an incomplete week in the interior becomes NaN.
/// Input need not be sorted; duplicate days are an error.
WeeklySeries weekly_aggregate(std::span<const DailyPoint> daily, Reducer reducer);

// ---------------------------------------------------------------------------
// Windows and samples

/// A series slice starting at week `start`.
struct SeriesView {
  WeekIndex start = 0;
  std::span<const double> values;
};

/// Window for `spec` at time t: lookback + 1 values ending at t for Observed
/// features, or at t + offset for Climate/Known features.
///
/// Throws InsufficientHistory when the window would start before the series,
/// InsufficientForecast when it would run past the series end, and
/// MissingValue when a value inside it is NaN.
Window build_window(SeriesView series, WeekIndex t, const FeatureSpec& spec, std::size_t lookback);

/// Aligned inputs for one (entity, t). windows[i] belongs to features[i].
struct Sample {
  std::string entity;
  WeekIndex t = 0;
  std::vector<Window> windows;
  std::vector<double> target;  // y(t+1 .. t+horizon); empty at inference
};

struct SkipReport {
  std::map<std::string, std::size_t> by_cause;

  std::size_t total() const noexcept;
  void add(const SkipReport& other);
  std::string to_json() const;
};

struct SampleSet {
  std::vector<Sample> samples;
  SkipReport skipped;
};

struct AssembleOptions {
  /// Training and evaluation need the future target; inference does not.
  bool require_target = true;
  std::size_t threads = 1;
};

/// One sample per (entity, t) where every window can be built. Candidate t
/// values come from the target series. Output is sorted by entity, then t,
/// independent of the worker count.
SampleSet assemble_samples(const Dataset& dataset, std::span<const FeatureSpec> features,
                           const std::string& target_series, std::size_t lookback,
                           std::size_t horizon, const AssembleOptions& options = {});

/// Builds the windows of one sample; throws the build_window errors.
Sample build_sample(const Dataset& dataset, const ClimateIndex& climate,
                    std::span<const FeatureSpec> features, const std::string& entity,
                    WeekIndex t, std::size_t lookback);

}  // namespace seasoncast
