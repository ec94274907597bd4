#include "liqmode/timeutil.hpp"

#include <charconv>
#include <cstdio>

namespace liqmode {

// Howard Hinnant's civil-calendar algorithms.
DayNumber days_from_civil(const CivilDate& date) noexcept {
    const int y = date.year - (date.month <= 2 ? 1 : 0);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned mp = (date.month + 9) % 12;
    const unsigned doy = (153 * mp + 2) / 5 + date.day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<DayNumber>(era) * 146097 + static_cast<DayNumber>(doe) - 719468;
}

CivilDate civil_from_days(DayNumber days) noexcept {
    days += 719468;
    const DayNumber era = (days >= 0 ? days : days - 146096) / 146097;
    const auto doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    const auto y = static_cast<int>(static_cast<DayNumber>(yoe) + era * 400 + (m <= 2 ? 1 : 0));
    return CivilDate{y, m, d};
}

int weekday(DayNumber days) noexcept {
    return static_cast<int>(days >= -4 ? (days + 4) % 7 : (days + 5) % 7 + 6);
}

std::string format_date(DayNumber days) {
    const CivilDate c = civil_from_days(days);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

namespace {

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) {
        return false;
    }
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

}  // namespace

std::optional<DayNumber> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        return std::nullopt;
    }
    const CivilDate date{static_cast<int>(y), m, d};
    const DayNumber n = days_from_civil(date);
    const CivilDate back = civil_from_days(n);
    if (back.month != m || back.day != d) {
        return std::nullopt;  // e.g. 2021-02-30
    }
    return n;
}

std::optional<int> parse_clock(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        return std::nullopt;
    }
    unsigned h = 0, m = 0;
    if (!parse_uint(text.substr(0, colon), h) || !parse_uint(text.substr(colon + 1), m)) {
        return std::nullopt;
    }
    if (h > 23 || m > 59) {
        return std::nullopt;
    }
    return static_cast<int>(h * 60 + m);
}

std::string format_clock(int minutes_after_midnight) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d", minutes_after_midnight / 60,
                  minutes_after_midnight % 60);
    return buf;
}

}  // namespace liqmode
