#include <doctest.h>

#include "rawq/dates.hpp"

using namespace rawq;

namespace {

// Independent day-count oracle: walk the calendar one day at a time.
struct WalkingDate {
  int y = 1970;
  unsigned m = 1, d = 1;
  void advance() {
    ++d;
    if (d > days_in_month(y, m)) {
      d = 1;
      ++m;
      if (m > 12) {
        m = 1;
        ++y;
      }
    }
  }
};

}  // namespace

TEST_SUITE_BEGIN("dates");

TEST_CASE("epoch anchors") {
  CHECK(days_from_civil(1970, 1, 1) == 0);
  CHECK(days_from_civil(1970, 1, 2) == 1);
  CHECK(days_from_civil(1969, 12, 31) == -1);
  // 1994-01-01: 24 years after epoch, 6 of them leap (72,76,80,84,88,92).
  CHECK(days_from_civil(1994, 1, 1) == 24 * 365 + 6);
  CHECK(days_from_civil(1994, 1, 1) == 8766);
}

TEST_CASE("walking oracle agrees over three decades") {
  WalkingDate w;
  for (int32_t day = 0; day <= 11323; ++day) {  // through 2001-01-01
    CAPTURE(day);
    REQUIRE(days_from_civil(w.y, w.m, w.d) == day);
    CivilDate back = civil_from_days(day);
    REQUIRE(back.year == w.y);
    REQUIRE(back.month == w.m);
    REQUIRE(back.day == w.d);
    w.advance();
  }
  // 31 years, 8 of them leap (1972..2000 every fourth).
  CHECK(days_from_civil(2001, 1, 1) == 31 * 365 + 8);
}

TEST_CASE("leap rules") {
  CHECK(is_leap_year(2000));
  CHECK(is_leap_year(1996));
  CHECK(!is_leap_year(1900));
  CHECK(!is_leap_year(1995));
  CHECK(days_in_month(1996, 2) == 29);
  CHECK(days_in_month(1995, 2) == 28);
}

TEST_CASE("strict parse accepts only YYYY-MM-DD") {
  CHECK(parse_date("1994-01-01") == 8766);
  CHECK(parse_date("1970-01-01") == 0);
  CHECK(!parse_date("1994-1-01"));
  CHECK(!parse_date("1994/01/01"));
  CHECK(!parse_date("94-01-01"));
  CHECK(!parse_date("1994-00-10"));
  CHECK(!parse_date("1994-13-10"));
  CHECK(!parse_date("1994-02-29"));  // not a leap year
  CHECK(parse_date("1996-02-29"));
  CHECK(!parse_date("1994-01-01 "));
  CHECK(!parse_date(" 1994-01-01"));
  CHECK(!parse_date(""));
  CHECK(!parse_date("1994-01-0a"));
}

TEST_CASE("format round-trips parse") {
  for (int32_t day : {-719468, -1, 0, 1, 8766, 9131, 11323, 2932896}) {
    auto text = format_date(day);
    auto parsed = parse_date(text);
    REQUIRE(parsed);
    CHECK(*parsed == day);
  }
}

TEST_CASE("year addition clamps leap day") {
  int32_t feb29 = *parse_date("1996-02-29");
  CHECK(format_date(add_years(feb29, 1)) == "1997-02-28");
  CHECK(format_date(add_years(feb29, 4)) == "2000-02-29");
  int32_t jan1 = *parse_date("1994-01-01");
  CHECK(format_date(add_years(jan1, 1)) == "1995-01-01");
}

TEST_SUITE_END();
