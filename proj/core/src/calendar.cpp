#include "seasoncast/calendar.hpp"

#include <charconv>
#include <cstdio>

#include "seasoncast/error.hpp"

namespace seasoncast {
namespace {

using std::chrono::days;
using std::chrono::sys_days;
using std::chrono::year_month_day;

constexpr DayIndex kFirstMonday = 4;  // 1970-01-05

DayIndex floor_div(DayIndex a, DayIndex b) noexcept {
  DayIndex q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(whole) + "'");
  }
  return value;
}

year_month_day to_ymd(DayIndex day) noexcept {
  return year_month_day{sys_days{days{day}}};
}

}  // namespace

DayIndex parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "', expected YYYY-MM-DD");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  const int d = parse_int(text.substr(8, 2), text);
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::ParseError, "invalid calendar date '" + std::string(text) + "'");
  }
  return sys_days{ymd}.time_since_epoch().count();
}

std::string format_date(DayIndex day) {
  const auto ymd = to_ymd(day);
  const int y = static_cast<int>(ymd.year());
  const unsigned m = static_cast<unsigned>(ymd.month());
  const unsigned d = static_cast<unsigned>(ymd.day());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
  return buf;
}

WeekIndex week_of_day(DayIndex day) noexcept {
  return floor_div(day - kFirstMonday, 7);
}

DayIndex week_start(WeekIndex week) noexcept {
  return kFirstMonday + 7 * week;
}

int weekday(DayIndex day) noexcept {
  return static_cast<int>(day - kFirstMonday - 7 * floor_div(day - kFirstMonday, 7));
}

int iso_week_number(WeekIndex week) noexcept {
  const DayIndex thursday = week_start(week) + 3;
  const auto iso_year = to_ymd(thursday).year();
  const DayIndex jan1 = sys_days{iso_year / std::chrono::January / 1}.time_since_epoch().count();
  return static_cast<int>((thursday - jan1) / 7 + 1);
}

int month_of_week(WeekIndex week) noexcept {
  return static_cast<int>(static_cast<unsigned>(to_ymd(week_start(week) + 3).month()));
}

}  // namespace seasoncast
