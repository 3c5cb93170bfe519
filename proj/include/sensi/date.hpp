#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace sensi {

/// Calendar day, stored as days since the civil epoch.
using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 date (YYYY-MM-DD). Throws ValidationError on anything else.
Date parse_date(const std::string& text);

/// Formats as YYYY-MM-DD.
std::string format_date(Date d);

/// Day of week with Monday = 0 ... Sunday = 6.
int day_of_week_monday0(Date d);

/// Inclusive day count of [start, end]. Throws ValidationError if end < start.
long day_count(Date start, Date end);

/// All days of [start, end] inclusive, ascending.
std::vector<Date> date_range(Date start, Date end);

}  // namespace sensi
