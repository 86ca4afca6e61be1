#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace credhedge {

using Date = std::chrono::year_month_day;

/// Malformed or inconsistent input data (files, configuration, ranges).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid result (singular system,
/// root-finder failure, degenerate variance).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws DataError.
Date parse_date(std::string_view text);

std::string format_date(const Date& d);

/// Signed calendar-day difference b - a.
std::int64_t days_between(const Date& a, const Date& b);

Date add_days(const Date& d, std::int64_t days);

bool is_weekday(const Date& d);

/// Next Monday-to-Friday date strictly after d.
Date next_business_day(const Date& d);

/// Act/365 year fraction from a to b.
double year_fraction(const Date& a, const Date& b);

inline constexpr double kTradingDaysPerYear = 252.0;

}  // namespace credhedge
