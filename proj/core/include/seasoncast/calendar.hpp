#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace seasoncast {

/// Days since 1970-01-01.
using DayIndex = std::int64_t;

/// Monday-aligned week count: week 0 starts on Monday 1970-01-05.
using WeekIndex = std::int64_t;

/// Parses YYYY-MM-DD. Throws ParseError on anything else.
DayIndex parse_date(std::string_view text);

std::string format_date(DayIndex day);

WeekIndex week_of_day(DayIndex day) noexcept;

/// Monday of the given week.
DayIndex week_start(WeekIndex week) noexcept;

/// 0 = Monday ... 6 = Sunday.
int weekday(DayIndex day) noexcept;

/// ISO-8601 week number (1..53) of the week.
int iso_week_number(WeekIndex week) noexcept;

/// Calendar month (1..12) of the week's Thursday, the day that decides ISO
/// year membership.
int month_of_week(WeekIndex week) noexcept;

}  // namespace seasoncast
