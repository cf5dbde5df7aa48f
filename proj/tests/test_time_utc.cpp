#include <doctest.h>

#include "carepipe/time_utc.hpp"

using namespace carepipe;

TEST_CASE("civil date conversion round-trips") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(1970, 1, 2) == 1);
    CHECK(days_from_civil(1969, 12, 31) == -1);
    CHECK(days_from_civil(2000, 3, 1) == 11017);

    for (int64_t day : {-1000L, -1L, 0L, 1L, 20148L, 20200L, 30000L}) {
        const CivilDateTime c = civil_from_days(day);
        CHECK(days_from_civil(c.year, c.month, c.day) == day);
    }
}

TEST_CASE("weekday matches known calendar dates") {
    CHECK(make_utc(1970, 1, 1).weekday() == 4);   // Thursday
    CHECK(make_utc(2025, 3, 1).weekday() == 6);   // Saturday
    CHECK(make_utc(2025, 3, 2).weekday() == 0);   // Sunday
    CHECK(make_utc(2025, 3, 4).weekday() == 2);   // Tuesday
    CHECK(make_utc(2024, 2, 29).weekday() == 4);  // leap-day Thursday
}

TEST_CASE("day_number floors for pre-epoch instants") {
    CHECK(UtcTime{0}.day_number() == 0);
    CHECK(UtcTime{86399}.day_number() == 0);
    CHECK(UtcTime{86400}.day_number() == 1);
    CHECK(UtcTime{-1}.day_number() == -1);
    CHECK(UtcTime{-86400}.day_number() == -1);
    CHECK(UtcTime{-86401}.day_number() == -2);
    CHECK(UtcTime{-1}.seconds_of_day() == 86399);
}

TEST_CASE("iso formatting and parsing round-trip") {
    const UtcTime t = make_utc(2025, 3, 1, 9, 0, 0);
    CHECK(format_iso(t) == "2025-03-01T09:00:00Z");
    CHECK(parse_utc("2025-03-01T09:00:00Z") == t);
    CHECK(parse_utc("2025-03-01T09:00Z") == t);  // seconds optional

    for (UtcTime sample : {make_utc(1999, 12, 31, 23, 59, 59), make_utc(2025, 1, 1),
                           make_utc(2026, 8, 23, 12, 34, 56), UtcTime{0}}) {
        CHECK(parse_utc(format_iso(sample)) == sample);
    }
}

TEST_CASE("parse_utc rejects invalid input") {
    CHECK(!parse_utc(""));
    CHECK(!parse_utc("not a time"));
    CHECK(!parse_utc("2025-03-01"));
    CHECK(!parse_utc("2025-03-01T09:00:00"));   // missing Z
    CHECK(!parse_utc("2025-02-30T00:00:00Z"));  // no such day
    CHECK(!parse_utc("2025-13-01T00:00:00Z"));
    CHECK(!parse_utc("2025-03-01T24:00:00Z"));
    CHECK(!parse_utc("2025-03-01T09:61:00Z"));
}

TEST_CASE("ics basic format") {
    CHECK(format_ics_basic(make_utc(2025, 3, 1, 14, 0, 0)) == "20250301T140000Z");
    CHECK(format_ics_basic(make_utc(2026, 12, 31, 5, 7, 9)) == "20261231T050709Z");
}

TEST_CASE("arithmetic helpers") {
    const UtcTime t = make_utc(2025, 3, 1, 9, 30, 0);
    CHECK(t.plus_minutes(20) == make_utc(2025, 3, 1, 9, 50, 0));
    CHECK(t.plus_hours(15) == make_utc(2025, 3, 2, 0, 30, 0));
    CHECK(t.plus_days(31) == make_utc(2025, 4, 1, 9, 30, 0));
    CHECK(t.seconds_of_day() == 9 * 3600 + 30 * 60);
}
