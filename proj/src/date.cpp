#include "sensi/date.hpp"

#include <cctype>
#include <cstdio>

#include "sensi/errors.hpp"

namespace sensi {

Date parse_date(const std::string& text) {
    // YYYY-MM-DD, all digits, dashes at fixed positions
    auto fail = [&] { throw ValidationError("invalid date '" + text + "', expected YYYY-MM-DD"); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) fail();

    const int y = std::stoi(text.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(text.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(text.substr(8, 2)));
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) fail();
    return std::chrono::sys_days{ymd};
}

std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int day_of_week_monday0(Date d) {
    const std::chrono::weekday wd{d};
    return static_cast<int>(wd.iso_encoding()) - 1;
}

long day_count(Date start, Date end) {
    if (end < start)
        throw ValidationError("date range ends before it starts: " + format_date(start) + " .. " + format_date(end));
    return (end - start).count() + 1;
}

std::vector<Date> date_range(Date start, Date end) {
    const long n = day_count(start, end);
    std::vector<Date> days;
    days.reserve(static_cast<std::size_t>(n));
    for (Date d = start; d <= end; d += std::chrono::days{1}) days.push_back(d);
    return days;
}

}  // namespace sensi
