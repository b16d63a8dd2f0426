#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "demandcast/errors.hpp"

namespace demandcast {

/// Hours since 1970-01-01 00:00 on a uniform hourly grid.
using HourIndex = std::int64_t;

struct CivilDate {
  int year;
  int month;  // 1..12
  int day;    // 1..31
};

/// Days since 1970-01-01 (proleptic Gregorian).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

/// 0 = Monday .. 6 = Sunday.
inline int weekday_from_days(std::int64_t days) {
  return static_cast<int>(days >= -3 ? (days + 3) % 7 : (days + 4) % 7 + 6);
}

inline HourIndex hour_index(int year, int month, int day, int hour) {
  return days_from_civil(year, month, day) * 24 + hour;
}

inline int hour_of_day(HourIndex t) {
  return static_cast<int>(((t % 24) + 24) % 24);
}

inline std::int64_t day_of_hour(HourIndex t) {
  return (t - hour_of_day(t)) / 24;
}

/// 0 = Monday 00:00 .. 167 = Sunday 23:00.
inline int hour_of_week(HourIndex t) {
  return weekday_from_days(day_of_hour(t)) * 24 + hour_of_day(t);
}

/// Parses ISO-8601 timestamps at hour precision, e.g.
/// "2015-03-01T14:00", "2015-03-01 14:00:00", optional "Z" or "+01:00"
/// offset. Offsets are normalized away so the grid is fixed-offset.
/// Sub-hour components must be zero.
inline HourIndex parse_timestamp(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d,
                            &sep, &h, &mi, &s, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw data_error("UnparseableRow", "bad timestamp '" + text + "'");
  if (n == 6) {
    s = 0;
    // Recompute consumed length without seconds.
    std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d%n", &y, &mo, &d, &sep, &h, &mi,
                &consumed);
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23)
    throw data_error("UnparseableRow", "bad timestamp '" + text + "'");
  if (mi != 0 || s != 0)
    throw data_error("NonHourlySpacing",
                     "timestamp '" + text + "' is not on the hour grid");
  HourIndex t = hour_index(y, mo, d, h);
  const std::string rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest != "Z") {
    int oh = 0, om = 0;
    char sign = rest[0];
    if ((sign != '+' && sign != '-') ||
        std::sscanf(rest.c_str() + 1, "%d:%d", &oh, &om) < 1 || om != 0)
      throw data_error("UnparseableRow", "bad timestamp offset in '" + text + "'");
    t += (sign == '+' ? -oh : oh);
  }
  return t;
}

inline std::string format_timestamp(HourIndex t) {
  const CivilDate date = civil_from_days(day_of_hour(t));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00", date.year,
                date.month, date.day, hour_of_day(t));
  return buf;
}

}  // namespace demandcast
