#include "seasoncast/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <tuple>

#include "seasoncast/error.hpp"
#include "seasoncast/features.hpp"

namespace seasoncast {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Line cursor over a whole file held in memory.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    while (pos_ < text_.size()) {
      const auto end = text_.find('\n', pos_);
      const auto stop = end == std::string_view::npos ? text_.size() : end;
      line = text_.substr(pos_, stop - pos_);
      pos_ = stop + 1;
      ++line_no_;
      if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
      }
      if (!line.empty()) {
        return true;
      }
    }
    return false;
  }

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

/// Maps the required column names to their positions in the header.
std::vector<std::size_t> resolve_header(std::string_view header, std::span<const std::string_view> required,
                                        const std::filesystem::path& path) {
  if (header.size() >= 3 && static_cast<unsigned char>(header[0]) == 0xEF) {
    header.remove_prefix(3);  // UTF-8 byte order mark
  }
  const auto fields = split_fields(header);
  std::vector<std::size_t> index;
  for (auto name : required) {
    const auto it = std::find(fields.begin(), fields.end(), name);
    if (it == fields.end()) {
      throw Error(ErrorCode::ParseError, path.string() + ": missing column '" + std::string(name) + "'");
    }
    index.push_back(static_cast<std::size_t>(it - fields.begin()));
  }
  return index;
}

std::string_view field_at(const std::vector<std::string_view>& fields, std::size_t i,
                          std::string_view column, const std::filesystem::path& path, std::size_t line_no) {
  if (i >= fields.size()) {
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": missing value for column '" +
                                           std::string(column) + "'");
  }
  return fields[i];
}

long parse_long(std::string_view text, std::string_view column, const std::filesystem::path& path,
                std::size_t line_no) {
  long value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": column '" +
                                           std::string(column) + "' is not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  return out;
}

}  // namespace

std::string_view to_string(ClimateAttribute attribute) noexcept {
  switch (attribute) {
    case ClimateAttribute::TMin: return "tmin";
    case ClimateAttribute::TAvg: return "tavg";
    case ClimateAttribute::TMax: return "tmax";
    case ClimateAttribute::Precip: return "precip";
  }
  return "tavg";
}

ClimateAttribute parse_climate_attribute(std::string_view text) {
  if (text == "tmin") return ClimateAttribute::TMin;
  if (text == "tavg") return ClimateAttribute::TAvg;
  if (text == "tmax") return ClimateAttribute::TMax;
  if (text == "precip") return ClimateAttribute::Precip;
  throw Error(ErrorCode::ParseError, "unknown climate attribute '" + std::string(text) + "'");
}

const WeeklySeries* Dataset::find(const std::string& entity, const std::string& series_id) const {
  const auto e = series.find(entity);
  if (e == series.end()) {
    return nullptr;
  }
  const auto s = e->second.find(series_id);
  return s == e->second.end() ? nullptr : &s->second;
}

std::vector<std::string> Dataset::entities() const {
  std::vector<std::string> out;
  out.reserve(series.size());
  for (const auto& [entity, _] : series) {
    out.push_back(entity);
  }
  return out;
}

std::string location_of(std::string_view entity) {
  const auto slash = entity.find('/');
  return std::string(slash == std::string_view::npos ? entity : entity.substr(0, slash));
}

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "";
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) {
    throw Error(ErrorCode::IoError, "cannot format value");
  }
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text.empty() || text == "nan" || text == "NaN" || text == "NA") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

void read_series_csv(const std::filesystem::path& path, Dataset& dataset, const LoadOptions& options) {
  static constexpr std::string_view kColumns[] = {"entity_id", "date", "series_id", "value"};
  const std::string text = read_file(path);
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) {
    throw Error(ErrorCode::ParseError, path.string() + ": empty file, expected a header");
  }
  const auto col = resolve_header(line, kColumns, path);

  std::map<std::pair<std::string, std::string>, std::vector<DailyPoint>> rows;
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    const auto n = reader.line_no();
    const auto entity = field_at(fields, col[0], kColumns[0], path, n);
    const auto date = field_at(fields, col[1], kColumns[1], path, n);
    const auto series_id = field_at(fields, col[2], kColumns[2], path, n);
    const auto value_text = field_at(fields, col[3], kColumns[3], path, n);
    DailyPoint point;
    double value = 0.0;
    try {
      point.day = parse_date(date);
      value = parse_double(value_text);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    point.value = value;
    rows[{std::string(entity), std::string(series_id)}].push_back(point);
  }

  for (auto& [key, points] : rows) {
    std::sort(points.begin(), points.end(), [](const DailyPoint& a, const DailyPoint& b) { return a.day < b.day; });
    bool daily = false;
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (week_of_day(points[i].day) == week_of_day(points[i - 1].day)) {
        daily = true;
        break;
      }
    }
    WeeklySeries weekly;
    if (daily) {
      const auto reducer = options.summed_series.contains(key.second) ? Reducer::Sum : Reducer::Mean;
      weekly = weekly_aggregate(points, reducer);
    } else {
      weekly.start = week_of_day(points.front().day);
      const auto last = week_of_day(points.back().day);
      weekly.values.assign(static_cast<std::size_t>(last - weekly.start + 1), std::numeric_limits<double>::quiet_NaN());
      for (const auto& p : points) {
        weekly.values[static_cast<std::size_t>(week_of_day(p.day) - weekly.start)] = p.value;
      }
    }
    dataset.series[key.first][key.second] = std::move(weekly);
  }
}

void read_ensembles_csv(const std::filesystem::path& path, Dataset& dataset) {
  static constexpr std::string_view kColumns[] = {"location", "attribute", "issue_date",
                                                  "lead_week", "member_idx", "value"};
  const std::string text = read_file(path);
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line)) {
    throw Error(ErrorCode::ParseError, path.string() + ": empty file, expected a header");
  }
  const auto col = resolve_header(line, kColumns, path);

  struct Cell {
    long lead;
    long member;
    double value;
  };
  std::map<std::tuple<std::string, ClimateAttribute, WeekIndex>, std::vector<Cell>> groups;
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    const auto n = reader.line_no();
    std::string location(field_at(fields, col[0], kColumns[0], path, n));
    ClimateAttribute attribute{};
    WeekIndex issue = 0;
    double value = 0.0;
    try {
      attribute = parse_climate_attribute(field_at(fields, col[1], kColumns[1], path, n));
      issue = week_of_day(parse_date(field_at(fields, col[2], kColumns[2], path, n)));
      value = parse_double(field_at(fields, col[5], kColumns[5], path, n));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    const long lead = parse_long(field_at(fields, col[3], kColumns[3], path, n), kColumns[3], path, n);
    const long member = parse_long(field_at(fields, col[4], kColumns[4], path, n), kColumns[4], path, n);
    if (lead < 1 || member < 0) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(n) +
                                             ": lead_week must be >= 1 and member_idx >= 0");
    }
    groups[{std::move(location), attribute, issue}].push_back(Cell{lead, member, value});
  }

  for (auto& [key, cells] : groups) {
    EnsembleForecast f;
    f.location = std::get<0>(key);
    f.attribute = std::get<1>(key);
    f.issue_week = std::get<2>(key);
    long max_lead = 0;
    long max_member = -1;
    for (const auto& c : cells) {
      max_lead = std::max(max_lead, c.lead);
      max_member = std::max(max_member, c.member);
    }
    f.n_leads = static_cast<std::size_t>(max_lead);
    f.n_members = static_cast<std::size_t>(max_member + 1);
    if (cells.size() != f.n_leads * f.n_members) {
      throw Error(ErrorCode::ParseError, path.string() + ": ensemble " + f.location + "/" +
                                             std::string(to_string(f.attribute)) + " issued " +
                                             format_date(week_start(f.issue_week)) +
                                             " is not a complete member x lead grid");
    }
    f.members.assign(f.n_leads * f.n_members, std::numeric_limits<double>::quiet_NaN());
    for (const auto& c : cells) {
      f.members[static_cast<std::size_t>(c.member) * f.n_leads + static_cast<std::size_t>(c.lead - 1)] = c.value;
    }
    dataset.ensembles.push_back(std::move(f));
  }
}

Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options) {
  Dataset dataset;
  read_series_csv(dir / kSeriesFile, dataset, options);
  const auto ensembles = dir / kEnsembleFile;
  if (std::filesystem::exists(ensembles)) {
    read_ensembles_csv(ensembles, dataset);
  }
  return dataset;
}

void write_series_csv(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_for_write(path);
  std::string buffer = "entity_id,date,series_id,value\n";
  for (const auto& [entity, by_id] : dataset.series) {
    for (const auto& [series_id, s] : by_id) {
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        buffer += entity;
        buffer += ',';
        buffer += format_date(week_start(s.start + static_cast<WeekIndex>(i)));
        buffer += ',';
        buffer += series_id;
        buffer += ',';
        buffer += format_double(s.values[i]);
        buffer += '\n';
      }
    }
  }
  out << buffer;
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
  }
}

void write_ensembles_csv(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = open_for_write(path);
  std::string buffer = "location,attribute,issue_date,lead_week,member_idx,value\n";
  for (const auto& f : dataset.ensembles) {
    const std::string prefix =
        f.location + "," + std::string(to_string(f.attribute)) + "," + format_date(week_start(f.issue_week)) + ",";
    for (std::size_t lead = 0; lead < f.n_leads; ++lead) {
      for (std::size_t m = 0; m < f.n_members; ++m) {
        buffer += prefix;
        buffer += std::to_string(lead + 1);
        buffer += ',';
        buffer += std::to_string(m);
        buffer += ',';
        buffer += format_double(f.at(m, lead));
        buffer += '\n';
      }
    }
    if (buffer.size() > (1u << 22)) {
      out << buffer;
      buffer.clear();
    }
  }
  out << buffer;
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing " + path.string());
  }
}

}  // namespace seasoncast
