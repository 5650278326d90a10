#include "seasoncast/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "seasoncast/dataset.hpp"
#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": length " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

struct Accumulator {
  double sq = 0.0;
  double abs = 0.0;
  double ape = 0.0;
  std::size_t n = 0;
  std::size_t n_ape = 0;

  void add(double y, double yhat) {
    const double r = y - yhat;
    sq += r * r;
    abs += std::abs(r);
    ++n;
    if (std::abs(y) >= kMapeEpsilon) {
      ape += std::abs(r) / std::max(std::abs(y), kMapeEpsilon);
      ++n_ape;
    }
  }

  MetricBucket finish(Bucket label) const {
    if (n == 0) {
      throw Error(ErrorCode::DimensionMismatch, "no points in bucket " + std::string(to_string(label)));
    }
    if (n_ape == 0) {
      throw Error(ErrorCode::AllTargetsNearZero,
                  "every target in bucket " + std::string(to_string(label)) + " is near zero");
    }
    MetricBucket b;
    b.label = label;
    b.rmse = std::sqrt(sq / static_cast<double>(n));
    b.mae = abs / static_cast<double>(n);
    b.mape = ape / static_cast<double>(n_ape);
    b.points = n;
    b.mape_points = n_ape;
    return b;
  }
};

constexpr std::size_t kReportHorizon = 12;
constexpr Bucket kBuckets[] = {Bucket::W1_4, Bucket::W5_8, Bucket::W9_12, Bucket::Overall};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string strip_trailing(std::string s) {
  while (!s.empty() && s.back() == ' ') {
    s.pop_back();
  }
  return s;
}

double parse_value(std::string_view text, std::size_t line_no, std::string_view column) {
  try {
    const double v = parse_double(text);
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::ParseError, "not finite");
    }
    return v;
  } catch (const Error&) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": column '" + std::string(column) +
                                           "' has invalid value '" + std::string(text) + "'");
  }
}

/// Header-driven CSV cursor used by the report readers.
class CsvTable {
 public:
  CsvTable(std::string_view text, std::span<const std::string_view> required) {
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') {
        line.pop_back();
      }
      if (!line.empty()) {
        lines_.push_back(line);
      }
    }
    if (lines_.empty()) {
      throw Error(ErrorCode::ParseError, "empty report: missing column '" + std::string(required.front()) + "'");
    }
    const auto header = split_fields(lines_.front());
    for (auto name : required) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw Error(ErrorCode::ParseError, "missing column '" + std::string(name) + "'");
      }
      index_.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    names_.assign(required.begin(), required.end());
  }

  std::size_t rows() const noexcept { return lines_.size() - 1; }

  std::vector<std::string> row(std::size_t r) const {
    const auto fields = split_fields(lines_[r + 1]);
    std::vector<std::string> out;
    for (std::size_t c = 0; c < index_.size(); ++c) {
      if (index_[c] >= fields.size()) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(r + 2) + ": missing value for column '" + std::string(names_[c]) + "'");
      }
      out.emplace_back(fields[index_[c]]);
    }
    return out;
  }

 private:
  std::vector<std::string> lines_;
  std::vector<std::size_t> index_;
  std::vector<std::string_view> names_;
};

}  // namespace

double mape(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y.size(), yhat.size(), "mape");
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) >= kMapeEpsilon) {
      total += std::abs(y[i] - yhat[i]) / std::max(std::abs(y[i]), kMapeEpsilon);
      ++n;
    }
  }
  if (n == 0) {
    throw Error(ErrorCode::AllTargetsNearZero, "mape: every target is near zero");
  }
  return total / static_cast<double>(n);
}

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y.size(), yhat.size(), "rmse");
  if (y.empty()) {
    return 0.0;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  }
  return std::sqrt(ss / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  check_lengths(y.size(), yhat.size(), "mae");
  if (y.empty()) {
    return 0.0;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += std::abs(y[i] - yhat[i]);
  }
  return s / static_cast<double>(y.size());
}

std::string_view to_string(Bucket bucket) noexcept {
  switch (bucket) {
    case Bucket::W1_4: return "W1_4";
    case Bucket::W5_8: return "W5_8";
    case Bucket::W9_12: return "W9_12";
    case Bucket::Overall: return "Overall";
  }
  return "Overall";
}

Bucket parse_bucket(std::string_view text) {
  for (auto b : kBuckets) {
    if (to_string(b) == text) {
      return b;
    }
  }
  throw Error(ErrorCode::ParseError, "column 'bucket' has unknown value '" + std::string(text) + "'");
}

std::vector<MetricBucket> bucketed_report(std::span<const std::vector<double>> predictions,
                                          std::span<const std::vector<double>> truths) {
  check_lengths(predictions.size(), truths.size(), "bucketed_report forecasts/truths");
  Accumulator acc[4];
  for (std::size_t s = 0; s < truths.size(); ++s) {
    const auto& y = truths[s];
    const auto& yhat = predictions[s];
    if (y.size() != kReportHorizon || yhat.size() != kReportHorizon) {
      throw Error(ErrorCode::HorizonMismatch, "bucketed_report needs 12-step forecasts and truths, got " +
                                                  std::to_string(yhat.size()) + " and " + std::to_string(y.size()));
    }
    for (std::size_t h = 0; h < kReportHorizon; ++h) {
      acc[h / 4].add(y[h], yhat[h]);
      acc[3].add(y[h], yhat[h]);
    }
  }
  std::vector<MetricBucket> out;
  for (std::size_t b = 0; b < 4; ++b) {
    out.push_back(acc[b].finish(kBuckets[b]));
  }
  return out;
}

std::vector<MetricBucket> bucketed_report(std::span<const Forecast> forecasts,
                                          std::span<const std::vector<double>> truths) {
  std::vector<std::vector<double>> predictions;
  predictions.reserve(forecasts.size());
  for (const auto& f : forecasts) {
    predictions.push_back(f.point());
  }
  return bucketed_report(predictions, truths);
}

const MetricBucket& overall(std::span<const MetricBucket> report) {
  for (const auto& b : report) {
    if (b.label == Bucket::Overall) {
      return b;
    }
  }
  throw Error(ErrorCode::KeyMismatch, "report has no Overall bucket");
}

ComparisonRow error_reduction(std::span<const MetricBucket> base, std::span<const MetricBucket> variant,
                              std::string dataset) {
  const auto& b = overall(base);
  const auto& v = overall(variant);
  auto reduction = [](double base_value, double variant_value, const char* name) {
    if (base_value == 0.0) {
      throw Error(ErrorCode::ZeroBaseMetric, std::string("base ") + name + " is zero");
    }
    return 100.0 * (base_value - variant_value) / base_value;
  };
  ComparisonRow row;
  row.dataset = std::move(dataset);
  row.mape_reduction_pct = reduction(b.mape, v.mape, "MAPE");
  row.rmse_reduction_pct = reduction(b.rmse, v.rmse, "RMSE");
  row.mae_reduction_pct = reduction(b.mae, v.mae, "MAE");
  return row;
}

std::vector<ScenarioMetrics> scenario_report(std::span<const Forecast> forecasts,
                                             std::span<const std::vector<double>> truths) {
  check_lengths(forecasts.size(), truths.size(), "scenario_report forecasts/truths");
  std::map<std::string, Accumulator> by_entity;
  for (std::size_t s = 0; s < forecasts.size(); ++s) {
    const auto& yhat = forecasts[s].point();
    const auto& y = truths[s];
    check_lengths(y.size(), yhat.size(), "scenario_report horizon");
    auto& acc = by_entity[forecasts[s].entity];
    for (std::size_t h = 0; h < y.size(); ++h) {
      acc.add(y[h], yhat[h]);
    }
  }
  std::vector<ScenarioMetrics> out;
  for (const auto& [entity, acc] : by_entity) {
    if (acc.n == 0 || acc.n_ape == 0) {
      continue;
    }
    const auto b = acc.finish(Bucket::Overall);
    out.push_back(ScenarioMetrics{entity, b.mape, b.rmse, b.mae});
  }
  return out;
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::Better: return "Better";
    case Verdict::Tie: return "Tie";
    case Verdict::Worse: return "Worse";
  }
  return "Tie";
}

WinTieLoss win_tie_loss(std::span<const ScenarioMetrics> climate, std::span<const ScenarioMetrics> base) {
  std::map<std::string, const ScenarioMetrics*> base_by_key;
  for (const auto& s : base) {
    if (!base_by_key.emplace(s.scenario, &s).second) {
      throw Error(ErrorCode::KeyMismatch, "duplicate scenario '" + s.scenario + "' in base reports");
    }
  }
  if (climate.size() != base.size()) {
    throw Error(ErrorCode::KeyMismatch, "scenario counts differ: " + std::to_string(climate.size()) + " vs " +
                                            std::to_string(base.size()));
  }
  WinTieLoss out;
  std::size_t better = 0;
  std::size_t tie = 0;
  std::size_t worse = 0;
  for (const auto& c : climate) {
    const auto it = base_by_key.find(c.scenario);
    if (it == base_by_key.end()) {
      throw Error(ErrorCode::KeyMismatch, "scenario '" + c.scenario + "' missing from base reports");
    }
    const auto& b = *it->second;
    const int wins = (c.mape <= b.mape ? 1 : 0) + (c.rmse <= b.rmse ? 1 : 0);
    const Verdict v = wins == 2 ? Verdict::Better : (wins == 0 ? Verdict::Worse : Verdict::Tie);
    (v == Verdict::Better ? better : v == Verdict::Tie ? tie : worse) += 1;
    out.verdicts.push_back(ScenarioVerdict{c.scenario, v});
  }
  if (!climate.empty()) {
    const auto n = static_cast<double>(climate.size());
    out.better_pct = 100.0 * static_cast<double>(better) / n;
    out.tie_pct = 100.0 * static_cast<double>(tie) / n;
    out.worse_pct = 100.0 * static_cast<double>(worse) / n;
  }
  return out;
}

std::string format_table(std::span<const ReportRow> rows) {
  static constexpr std::string_view kGroups[] = {"week 1-4", "week 5-8", "week 9-12", "Overall"};
  std::vector<std::vector<std::string>> cells;  // per row: name + 8 numbers
  std::size_t name_w = std::string_view("Algorithm").size();
  std::size_t num_w = 4;
  for (const auto& row : rows) {
    std::vector<std::string> line{row.model};
    name_w = std::max(name_w, row.model.size());
    for (auto bucket : kBuckets) {
      const auto it = std::find_if(row.buckets.begin(), row.buckets.end(),
                                   [&](const MetricBucket& b) { return b.label == bucket; });
      if (it == row.buckets.end()) {
        throw Error(ErrorCode::KeyMismatch, "report row '" + row.model + "' lacks bucket " +
                                                std::string(to_string(bucket)));
      }
      line.push_back(fixed2(it->rmse));
      line.push_back(fixed2(it->mape));
    }
    for (std::size_t i = 1; i < line.size(); ++i) {
      num_w = std::max(num_w, line[i].size());
    }
    cells.push_back(std::move(line));
  }
  const std::size_t group_w = std::max<std::size_t>(2 * num_w + 2, 9);
  const std::size_t metric_pad = group_w - (2 * num_w + 2);

  std::string out;
  std::string header = pad_right("Algorithm", name_w);
  std::string sub = std::string(name_w, ' ');
  for (auto g : kGroups) {
    header += " | " + pad_right(std::string(g), group_w);
    sub += " | " + pad_left("RMSE", num_w) + "  " + pad_left("MAPE", num_w) + std::string(metric_pad, ' ');
  }
  out += strip_trailing(header) + "\n" + strip_trailing(sub) + "\n";
  for (const auto& line : cells) {
    std::string text = pad_right(line[0], name_w);
    for (std::size_t g = 0; g < 4; ++g) {
      text += " | " + pad_left(line[1 + 2 * g], num_w) + "  " + pad_left(line[2 + 2 * g], num_w) +
              std::string(metric_pad, ' ');
    }
    out += strip_trailing(text) + "\n";
  }
  return out;
}

std::string format_report_csv(std::span<const ReportRow> rows) {
  std::string out = "dataset,model,bucket,metric,value\n";
  for (const auto& row : rows) {
    for (const auto& b : row.buckets) {
      const std::string prefix = row.dataset + "," + row.model + "," + std::string(to_string(b.label)) + ",";
      out += prefix + "rmse," + format_double(b.rmse) + "\n";
      out += prefix + "mape," + format_double(b.mape) + "\n";
      out += prefix + "mae," + format_double(b.mae) + "\n";
    }
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  static constexpr std::string_view kColumns[] = {"dataset", "model", "bucket", "metric", "value"};
  const CsvTable table(text, kColumns);
  std::vector<ReportRow> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto f = table.row(r);
    const Bucket bucket = parse_bucket(f[2]);
    const double value = parse_value(f[4], r + 2, "value");
    auto row_it = std::find_if(rows.begin(), rows.end(),
                               [&](const ReportRow& row) { return row.dataset == f[0] && row.model == f[1]; });
    if (row_it == rows.end()) {
      rows.push_back(ReportRow{f[0], f[1], {}});
      row_it = std::prev(rows.end());
    }
    auto b_it = std::find_if(row_it->buckets.begin(), row_it->buckets.end(),
                             [&](const MetricBucket& b) { return b.label == bucket; });
    if (b_it == row_it->buckets.end()) {
      row_it->buckets.push_back(MetricBucket{bucket});
      b_it = std::prev(row_it->buckets.end());
    }
    if (f[3] == "rmse") {
      b_it->rmse = value;
    } else if (f[3] == "mape") {
      b_it->mape = value;
    } else if (f[3] == "mae") {
      b_it->mae = value;
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 2) + ": column 'metric' has unknown value '" +
                                             f[3] + "'");
    }
  }
  return rows;
}

std::string format_scenarios_csv(std::span<const ScenarioMetrics> scenarios) {
  std::string out = "scenario,mape,rmse,mae\n";
  for (const auto& s : scenarios) {
    out += s.scenario + "," + format_double(s.mape) + "," + format_double(s.rmse) + "," + format_double(s.mae) + "\n";
  }
  return out;
}

std::vector<ScenarioMetrics> parse_scenarios_csv(std::string_view text) {
  static constexpr std::string_view kColumns[] = {"scenario", "mape", "rmse", "mae"};
  const CsvTable table(text, kColumns);
  std::vector<ScenarioMetrics> out;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto f = table.row(r);
    out.push_back(ScenarioMetrics{f[0], parse_value(f[1], r + 2, "mape"), parse_value(f[2], r + 2, "rmse"),
                                  parse_value(f[3], r + 2, "mae")});
  }
  return out;
}

std::string format_comparison(std::span<const ComparisonRow> rows, const WinTieLoss* verdicts) {
  std::size_t name_w = std::string_view("Dataset").size();
  for (const auto& r : rows) {
    name_w = std::max(name_w, r.dataset.size());
  }
  std::string out = "Error reduction (%), positive = climate-aware model better\n";
  out += pad_right("Dataset", name_w) + " | " + pad_left("MAPE", 8) + " | " + pad_left("RMSE", 8) + " | " +
         pad_left("MAE", 8) + "\n";
  for (const auto& r : rows) {
    out += pad_right(r.dataset, name_w) + " | " + pad_left(fixed2(r.mape_reduction_pct), 8) + " | " +
           pad_left(fixed2(r.rmse_reduction_pct), 8) + " | " + pad_left(fixed2(r.mae_reduction_pct), 8) + "\n";
  }
  if (verdicts != nullptr) {
    out += "\nScenarios: " + std::to_string(verdicts->verdicts.size()) + "\n";
    out += "Better: " + fixed2(verdicts->better_pct) + "%  Tie: " + fixed2(verdicts->tie_pct) +
           "%  Worse: " + fixed2(verdicts->worse_pct) + "%\n";
    out += "Better or equal: " + fixed2(verdicts->better_pct + verdicts->tie_pct) + "%\n";
  }
  return out;
}

std::string format_comparison_csv(std::span<const ComparisonRow> rows, const WinTieLoss* verdicts) {
  std::string out = "kind,key,metric,value\n";
  for (const auto& r : rows) {
    out += "reduction_pct," + r.dataset + ",mape," + format_double(r.mape_reduction_pct) + "\n";
    out += "reduction_pct," + r.dataset + ",rmse," + format_double(r.rmse_reduction_pct) + "\n";
    out += "reduction_pct," + r.dataset + ",mae," + format_double(r.mae_reduction_pct) + "\n";
  }
  if (verdicts != nullptr) {
    out += "summary_pct,all,better," + format_double(verdicts->better_pct) + "\n";
    out += "summary_pct,all,tie," + format_double(verdicts->tie_pct) + "\n";
    out += "summary_pct,all,worse," + format_double(verdicts->worse_pct) + "\n";
    for (const auto& v : verdicts->verdicts) {
      out += "verdict," + v.scenario + ",verdict," + std::string(to_string(v.verdict)) + "\n";
    }
  }
  return out;
}

}  // namespace seasoncast
