#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "seasoncast/calendar.hpp"

namespace seasoncast {

enum class ClimateAttribute { TMin, TAvg, TMax, Precip };

std::string_view to_string(ClimateAttribute attribute) noexcept;
ClimateAttribute parse_climate_attribute(std::string_view text);

/// One issued seasonal forecast: members x leads, row-major. Column j holds
/// lead week j + 1, i.e. the week issue_week + j + 1.
struct EnsembleForecast {
  std::string location;
  ClimateAttribute attribute = ClimateAttribute::TAvg;
  WeekIndex issue_week = 0;
  std::size_t n_members = 0;
  std::size_t n_leads = 0;
  std::vector<double> members;

  double at(std::size_t member, std::size_t lead_index) const {
    return members[member * n_leads + lead_index];
  }
};

/// Contiguous weekly values; NaN marks a missing week.
struct WeeklySeries {
  WeekIndex start = 0;
  std::vector<double> values;

  WeekIndex end() const noexcept { return start + static_cast<WeekIndex>(values.size()); }

  double at(WeekIndex week) const noexcept {
    if (week < start || week >= end()) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return values[static_cast<std::size_t>(week - start)];
  }
};

/// Entities are "<store>/<product>"; the store part doubles as the climate
/// location key.
struct Dataset {
  std::map<std::string, std::map<std::string, WeeklySeries>> series;
  std::vector<EnsembleForecast> ensembles;

  const WeeklySeries* find(const std::string& entity, const std::string& series_id) const;
  std::vector<std::string> entities() const;
};

std::string location_of(std::string_view entity);

inline constexpr std::string_view kSeriesFile = "series.csv";
inline constexpr std::string_view kEnsembleFile = "ensembles.csv";

struct LoadOptions {
  /// Series aggregated with Sum when the file holds daily rows; all others use Mean.
  std::set<std::string> summed_series{"sales"};
};

Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Reads the series file (entity_id,date,series_id,value) into `dataset`.
void read_series_csv(const std::filesystem::path& path, Dataset& dataset, const LoadOptions& options = {});

/// Reads the ensemble file (location,attribute,issue_date,lead_week,member_idx,value).
void read_ensembles_csv(const std::filesystem::path& path, Dataset& dataset);

void write_series_csv(const std::filesystem::path& path, const Dataset& dataset);
void write_ensembles_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Splits one delimited line on commas (no quoting; identifiers must not
/// contain commas).
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace seasoncast
