#include "credhedge/core.hpp"

#include <charconv>
#include <cstdio>

namespace credhedge {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    auto first = text.data() + pos;
    auto last = first + len;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw DataError("invalid date '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const int y = parse_field(text, 0, 4);
    const int m = parse_field(text, 5, 2);
    const int d = parse_field(text, 8, 2);
    Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
              std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw DataError("invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::int64_t days_between(const Date& a, const Date& b) {
    return (std::chrono::sys_days{b} - std::chrono::sys_days{a}).count();
}

Date add_days(const Date& d, std::int64_t days) {
    return Date{std::chrono::sys_days{d} + std::chrono::days{days}};
}

bool is_weekday(const Date& d) {
    const std::chrono::weekday wd{std::chrono::sys_days{d}};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

Date next_business_day(const Date& d) {
    Date next = add_days(d, 1);
    while (!is_weekday(next)) next = add_days(next, 1);
    return next;
}

double year_fraction(const Date& a, const Date& b) {
    return static_cast<double>(days_between(a, b)) / 365.0;
}

}  // namespace credhedge
