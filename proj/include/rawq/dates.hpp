#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rawq {

// Dates are whole days since 1970-01-01, stored as int32.

struct CivilDate {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
};

// Proleptic Gregorian calendar conversions (Howard Hinnant's algorithms).
int32_t days_from_civil(int year, unsigned month, unsigned day);
CivilDate civil_from_days(int32_t days);

bool is_leap_year(int year);
unsigned days_in_month(int year, unsigned month);

// Strict `YYYY-MM-DD` with 4-2-2 digits; anything else is rejected.
std::optional<int32_t> parse_date(std::string_view text);

std::string format_date(int32_t days);

// Civil-calendar year addition; Feb 29 clamps to Feb 28 when the target
// year is not a leap year.
int32_t add_years(int32_t days, int n);

}  // namespace rawq
