#pragma once
// UTC timestamps at second resolution.
//
// All times in the pipeline are UTC; files carry ISO-8601 text
// ("2025-03-01T09:00:00Z"). No timezone database, no DST.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace carepipe {

// Days since 1970-01-01 from a civil date (proleptic Gregorian).
// Howard Hinnant's algorithm.
constexpr int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<int64_t>(era) * 146097 + static_cast<int64_t>(doe) - 719468;
}

struct CivilDateTime {
    int year = 1970;
    unsigned month = 1;   // 1..12
    unsigned day = 1;     // 1..31
    unsigned hour = 0;    // 0..23
    unsigned minute = 0;
    unsigned second = 0;
};

constexpr CivilDateTime civil_from_days(int64_t z) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDateTime{y + (m <= 2), m, d, 0, 0, 0};
}

// Seconds since the Unix epoch, UTC. Value type, totally ordered.
struct UtcTime {
    int64_t secs = 0;

    constexpr auto operator<=>(const UtcTime&) const = default;

    constexpr UtcTime plus_seconds(int64_t s) const { return UtcTime{secs + s}; }
    constexpr UtcTime plus_minutes(int64_t m) const { return UtcTime{secs + m * 60}; }
    constexpr UtcTime plus_hours(int64_t h) const { return UtcTime{secs + h * 3600}; }
    constexpr UtcTime plus_days(int64_t d) const { return UtcTime{secs + d * 86400}; }

    constexpr int64_t day_number() const {
        // floor division for pre-epoch times
        int64_t d = secs / 86400;
        if (secs % 86400 < 0) --d;
        return d;
    }
    constexpr int64_t seconds_of_day() const { return secs - day_number() * 86400; }

    // 0 = Sunday .. 6 = Saturday (1970-01-01 was a Thursday).
    constexpr int weekday() const {
        int64_t w = (day_number() + 4) % 7;
        return static_cast<int>(w < 0 ? w + 7 : w);
    }

    constexpr CivilDateTime civil() const {
        CivilDateTime c = civil_from_days(day_number());
        const int64_t s = seconds_of_day();
        c.hour = static_cast<unsigned>(s / 3600);
        c.minute = static_cast<unsigned>((s % 3600) / 60);
        c.second = static_cast<unsigned>(s % 60);
        return c;
    }
};

constexpr UtcTime make_utc(int y, unsigned mo, unsigned d, unsigned h = 0, unsigned mi = 0,
                           unsigned s = 0) {
    return UtcTime{days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s};
}

// "2025-03-01T09:00:00Z"; always second resolution.
inline std::string format_iso(UtcTime t) {
    const CivilDateTime c = t.civil();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ", c.year, c.month, c.day,
                  c.hour, c.minute, c.second);
    return buf;
}

// RFC 5545 UTC basic format: "20250301T140000Z".
inline std::string format_ics_basic(UtcTime t) {
    const CivilDateTime c = t.civil();
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%04d%02u%02uT%02u%02u%02uZ", c.year, c.month, c.day, c.hour,
                  c.minute, c.second);
    return buf;
}

// Accepts "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DDTHH:MMZ".
inline std::optional<UtcTime> parse_utc(std::string_view sv) {
    auto digits = [&](size_t pos, size_t n, int& out) {
        if (pos + n > sv.size()) return false;
        int v = 0;
        for (size_t i = 0; i < n; ++i) {
            const char ch = sv[pos + i];
            if (ch < '0' || ch > '9') return false;
            v = v * 10 + (ch - '0');
        }
        out = v;
        return true;
    };
    int y, mo, d, h, mi, s = 0;
    if (!digits(0, 4, y) || !digits(5, 2, mo) || !digits(8, 2, d) || !digits(11, 2, h) ||
        !digits(14, 2, mi))
        return std::nullopt;
    if (sv.size() < 5 || sv[4] != '-' || sv[7] != '-' || (sv[10] != 'T' && sv[10] != 't') ||
        sv[13] != ':')
        return std::nullopt;
    size_t rest = 16;
    if (sv.size() > 16 && sv[16] == ':') {
        if (!digits(17, 2, s)) return std::nullopt;
        rest = 19;
    }
    if (rest >= sv.size() || (sv[rest] != 'Z' && sv[rest] != 'z') || rest + 1 != sv.size())
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59) return std::nullopt;
    // reject impossible dates (e.g. Feb 30) by round-tripping
    const UtcTime t = make_utc(y, static_cast<unsigned>(mo), static_cast<unsigned>(d),
                               static_cast<unsigned>(h), static_cast<unsigned>(mi),
                               static_cast<unsigned>(s));
    const CivilDateTime c = t.civil();
    if (c.year != y || c.month != static_cast<unsigned>(mo) || c.day != static_cast<unsigned>(d))
        return std::nullopt;
    return t;
}

}  // namespace carepipe
