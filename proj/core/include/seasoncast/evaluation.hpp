#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seasoncast/model.hpp"

namespace seasoncast {

/// Targets with |y| below this are inadmissible for MAPE and are counted
/// rather than divided by.
inline constexpr double kMapeEpsilon = 1e-6;

/// MAPE as a fraction (0.19, not 19%). Throws AllTargetsNearZero when no
/// target is admissible, DimensionMismatch on unequal lengths.
double mape(std::span<const double> y, std::span<const double> yhat);
double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

enum class Bucket { W1_4, W5_8, W9_12, Overall };

std::string_view to_string(Bucket bucket) noexcept;
Bucket parse_bucket(std::string_view text);

struct MetricBucket {
  Bucket label = Bucket::Overall;
  double rmse = 0.0;
  double mape = 0.0;
  double mae = 0.0;
  std::size_t points = 0;
  std::size_t mape_points = 0;  // admissible points behind mape
};

/// Horizon buckets 1-4, 5-8, 9-12 and Overall (1-12). Residuals are pooled
/// per bucket across every (entity, t) before reducing, so Overall is not an
/// average of the buckets. Requires a 12-step horizon.
std::vector<MetricBucket> bucketed_report(std::span<const std::vector<double>> predictions,
                                          std::span<const std::vector<double>> truths);
std::vector<MetricBucket> bucketed_report(std::span<const Forecast> forecasts,
                                          std::span<const std::vector<double>> truths);

const MetricBucket& overall(std::span<const MetricBucket> report);

/// Percent reductions 100 * (base - variant) / base; positive means the
/// variant is better.
struct ComparisonRow {
  std::string dataset;
  double mape_reduction_pct = 0.0;
  double rmse_reduction_pct = 0.0;
  double mae_reduction_pct = 0.0;
};

/// Compares the Overall buckets. Throws ZeroBaseMetric when a base metric is 0.
ComparisonRow error_reduction(std::span<const MetricBucket> base, std::span<const MetricBucket> variant,
                              std::string dataset = {});

/// Overall metrics of one scenario (a store/product pair).
struct ScenarioMetrics {
  std::string scenario;
  double mape = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
};

/// Overall metrics per entity, sorted by entity. Entities whose targets are
/// all near zero are left out.
std::vector<ScenarioMetrics> scenario_report(std::span<const Forecast> forecasts,
                                             std::span<const std::vector<double>> truths);

enum class Verdict { Better, Tie, Worse };

std::string_view to_string(Verdict verdict) noexcept;

struct ScenarioVerdict {
  std::string scenario;
  Verdict verdict = Verdict::Tie;
};

struct WinTieLoss {
  std::vector<ScenarioVerdict> verdicts;
  double better_pct = 0.0;
  double tie_pct = 0.0;
  double worse_pct = 0.0;
};

/// A metric counts as won when the climate model is better or equal.
/// Better: won on both MAPE and RMSE; Worse: lost both; Tie: exactly one.
/// Throws KeyMismatch unless both sides list the same scenarios.
WinTieLoss win_tie_loss(std::span<const ScenarioMetrics> climate, std::span<const ScenarioMetrics> base);

// ---------------------------------------------------------------------------
// Report files

struct ReportRow {
  std::string dataset;
  std::string model;
  std::vector<MetricBucket> buckets;
};

/// Aligned text table in the week 1-4 / 5-8 / 9-12 / Overall layout with
/// RMSE and MAPE per bucket, two decimals.
std::string format_table(std::span<const ReportRow> rows);

/// Long format: dataset,model,bucket,metric,value (metric in rmse, mape, mae).
std::string format_report_csv(std::span<const ReportRow> rows);

/// Throws ParseError naming the offending column.
std::vector<ReportRow> parse_report_csv(std::string_view text);

std::string format_scenarios_csv(std::span<const ScenarioMetrics> scenarios);
std::vector<ScenarioMetrics> parse_scenarios_csv(std::string_view text);

std::string format_comparison(std::span<const ComparisonRow> rows, const WinTieLoss* verdicts);
std::string format_comparison_csv(std::span<const ComparisonRow> rows, const WinTieLoss* verdicts);

}  // namespace seasoncast
