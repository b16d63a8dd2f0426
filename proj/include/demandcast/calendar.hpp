#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "demandcast/errors.hpp"
#include "demandcast/series.hpp"
#include "demandcast/time.hpp"

namespace demandcast {

/// Average-year seasonality in hours (365.24 * 24).
inline constexpr double kAnnualPeriodHours = 8765.76;

enum class HolidayClass { fixed_weekday, fixed_date };

/// A holiday rule is either "MM-DD" (fixed date) or "<Weekday>+<n>"
/// (fixed weekday: the n-th occurrence of that weekday within the year,
/// e.g. "Fri+14").
struct HolidayRule {
  std::string name;
  HolidayClass klass;
  int month = 0, day = 0;   // fixed_date
  int weekday = 0, nth = 0; // fixed_weekday; weekday 0 = Monday

  /// Day number (days since epoch) of this holiday in a given year.
  std::int64_t day_in_year(int year) const {
    if (klass == HolidayClass::fixed_date)
      return days_from_civil(year, month, day);
    const std::int64_t jan1 = days_from_civil(year, 1, 1);
    const int first_wd = weekday_from_days(jan1);
    const int offset = (weekday - first_wd + 7) % 7;
    return jan1 + offset + 7 * static_cast<std::int64_t>(nth - 1);
  }
};

inline int parse_weekday_name(const std::string& s) {
  static const char* names[7] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};
  for (int i = 0; i < 7; ++i)
    if (s == names[i]) return i;
  throw config_error("UnparseableRule", "unknown weekday '" + s + "'");
}

inline HolidayRule parse_holiday_rule(const std::string& name,
                                      const std::string& rule,
                                      const std::string& klass) {
  HolidayRule out;
  out.name = name;
  if (klass == "fixed_date") {
    out.klass = HolidayClass::fixed_date;
    if (std::sscanf(rule.c_str(), "%d-%d", &out.month, &out.day) != 2 ||
        out.month < 1 || out.month > 12 || out.day < 1 || out.day > 31)
      throw config_error("UnparseableRule", "bad fixed-date rule '" + rule + "'");
  } else if (klass == "fixed_weekday") {
    out.klass = HolidayClass::fixed_weekday;
    const auto plus = rule.find('+');
    if (plus == std::string::npos)
      throw config_error("UnparseableRule", "bad fixed-weekday rule '" + rule + "'");
    out.weekday = parse_weekday_name(rule.substr(0, plus));
    out.nth = std::stoi(rule.substr(plus + 1));
    if (out.nth < 1 || out.nth > 53)
      throw config_error("UnparseableRule", "bad ordinal in rule '" + rule + "'");
  } else {
    throw config_error("UnparseableRule", "unknown holiday class '" + klass + "'");
  }
  return out;
}

/// Ordered holiday list; the order fixes the HD_1..HD_P column indexing.
struct HolidayCalendar {
  std::vector<HolidayRule> holidays;

  std::size_t count() const { return holidays.size(); }
  std::size_t count_fixed_weekday() const {
    std::size_t n = 0;
    for (const auto& h : holidays)
      if (h.klass == HolidayClass::fixed_weekday) ++n;
    return n;
  }
  std::size_t count_fixed_date() const {
    return count() - count_fixed_weekday();
  }
};

/// German-style default with 11 holidays. The fixed-weekday entries
/// approximate the Easter cycle by fixed week-of-year ordinals; treat this
/// as a configurable placeholder, not an authoritative civil calendar.
inline HolidayCalendar default_holiday_calendar() {
  HolidayCalendar cal;
  cal.holidays = {
      parse_holiday_rule("new_year", "01-01", "fixed_date"),
      parse_holiday_rule("good_friday", "Fri+14", "fixed_weekday"),
      parse_holiday_rule("easter_monday", "Mon+14", "fixed_weekday"),
      parse_holiday_rule("labour_day", "05-01", "fixed_date"),
      parse_holiday_rule("ascension", "Thu+20", "fixed_weekday"),
      parse_holiday_rule("whit_monday", "Mon+21", "fixed_weekday"),
      parse_holiday_rule("corpus_christi", "Thu+22", "fixed_weekday"),
      parse_holiday_rule("unity_day", "10-03", "fixed_date"),
      parse_holiday_rule("all_saints", "11-01", "fixed_date"),
      parse_holiday_rule("christmas", "12-25", "fixed_date"),
      parse_holiday_rule("boxing_day", "12-26", "fixed_date"),
  };
  return cal;
}

/// Loads a `name,rule,class` CSV (header row required).
inline HolidayCalendar load_holiday_calendar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("FileNotFound", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw data_error("UnparseableRow", "empty calendar file");
  HolidayCalendar cal;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::strip(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() < 3)
      throw data_error("UnparseableRow",
                       "calendar row " + std::to_string(line_no));
    cal.holidays.push_back(parse_holiday_rule(detail::strip(cells[0]),
                                              detail::strip(cells[1]),
                                              detail::strip(cells[2])));
  }
  return cal;
}

/// Per-index calendar features for a contiguous hourly range.
/// Immutable after construction.
class CalendarContext {
public:
  CalendarContext(HourIndex start, std::size_t length,
                  HolidayCalendar calendar = default_holiday_calendar(),
                  int base_year = 0)
      : start_(start), calendar_(std::move(calendar)) {
    const CivilDate first = civil_from_days(day_of_hour(start));
    base_year_ = base_year != 0 ? base_year : first.year;
    anchor_ = hour_index(base_year_, 1, 1, 0);

    // Resolve holiday days for every civil year touched by the range.
    const CivilDate last =
        civil_from_days(day_of_hour(start + static_cast<HourIndex>(length)));
    std::unordered_map<std::int64_t, int> holiday_of_day;
    for (int year = first.year - 1; year <= last.year + 1; ++year)
      for (std::size_t k = 0; k < calendar_.holidays.size(); ++k)
        holiday_of_day[calendar_.holidays[k].day_in_year(year)] =
            static_cast<int>(k);

    hod_.resize(length);
    how_.resize(length);
    holiday_.assign(length, -1);
    for (std::size_t i = 0; i < length; ++i) {
      const HourIndex t = start + static_cast<HourIndex>(i);
      hod_[i] = static_cast<std::int8_t>(hour_of_day(t));
      how_[i] = static_cast<std::int16_t>(hour_of_week(t));
      const auto it = holiday_of_day.find(day_of_hour(t));
      if (it != holiday_of_day.end())
        holiday_[i] = static_cast<std::int16_t>(it->second);
    }
  }

  std::size_t size() const { return hod_.size(); }
  HourIndex start() const { return start_; }
  const HolidayCalendar& calendar() const { return calendar_; }
  int base_year() const { return base_year_; }

  int hour_of_day(std::size_t i) const { return hod_[i]; }
  int hour_of_week(std::size_t i) const { return how_[i]; }
  /// Holiday index within the calendar, or -1.
  int holiday(std::size_t i) const { return holiday_[i]; }
  bool is_holiday(std::size_t i) const { return holiday_[i] >= 0; }
  HolidayClass holiday_class(std::size_t i) const {
    return calendar_.holidays[static_cast<std::size_t>(holiday_[i])].klass;
  }

  /// Hours since Jan 1 00:00 of the base year, modulo the average-year
  /// period of 8765.76 hours.
  double position_in_year(std::size_t i) const {
    const double hours =
        static_cast<double>(start_ + static_cast<HourIndex>(i) - anchor_);
    double pos = std::fmod(hours, kAnnualPeriodHours);
    if (pos < 0) pos += kAnnualPeriodHours;
    return pos;
  }

private:
  HourIndex start_;
  HolidayCalendar calendar_;
  int base_year_;
  HourIndex anchor_;
  std::vector<std::int8_t> hod_;
  std::vector<std::int16_t> how_;
  std::vector<std::int16_t> holiday_;
};

}  // namespace demandcast
