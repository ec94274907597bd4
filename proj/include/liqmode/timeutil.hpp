#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace liqmode {

// Milliseconds since the Unix epoch.
using Millis = std::int64_t;

inline constexpr Millis kMillisPerSecond = 1'000;
inline constexpr Millis kMillisPerMinute = 60'000;
inline constexpr Millis kMillisPerDay = 86'400'000;

// Day number: days since 1970-01-01 (proleptic Gregorian).
using DayNumber = std::int64_t;

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
};

DayNumber days_from_civil(const CivilDate& date) noexcept;
CivilDate civil_from_days(DayNumber days) noexcept;

// 0 = Sunday ... 6 = Saturday
int weekday(DayNumber days) noexcept;

// "YYYY-MM-DD"
std::string format_date(DayNumber days);
std::optional<DayNumber> parse_date(std::string_view text);

// "HH:MM" -> minutes after midnight
std::optional<int> parse_clock(std::string_view text);
std::string format_clock(int minutes_after_midnight);

// Floor division, valid for negative numerators.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

}  // namespace liqmode
