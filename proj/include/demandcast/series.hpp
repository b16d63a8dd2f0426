#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "demandcast/errors.hpp"
#include "demandcast/time.hpp"

namespace demandcast {

/// Hourly demand observations on a gap-free grid. Missing values are
/// explicit NaN entries, never skipped indices.
struct TimeSeries {
  HourIndex start = 0;
  std::vector<double> values;

  static double missing() { return std::numeric_limits<double>::quiet_NaN(); }
  static bool is_missing(double v) { return std::isnan(v); }

  std::size_t size() const { return values.size(); }
  HourIndex time_at(std::size_t i) const {
    return start + static_cast<HourIndex>(i);
  }

  bool has_missing(std::size_t first, std::size_t last) const {
    for (std::size_t i = first; i < last; ++i)
      if (is_missing(values[i])) return true;
    return false;
  }
  bool has_missing() const { return has_missing(0, size()); }
  std::size_t missing_count() const {
    std::size_t n = 0;
    for (double v : values)
      if (is_missing(v)) ++n;
    return n;
  }

  /// Contiguous slice [first, last); keeps grid alignment.
  TimeSeries slice(std::size_t first, std::size_t last) const {
    TimeSeries out;
    out.start = time_at(first);
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                      values.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
  }
};

struct CsvSchema {
  std::string timestamp_column = "timestamp";
  std::string value_column = "demand";
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Reads a header CSV with a timestamp and a demand column, sorts rows onto
/// the hourly grid and materializes gaps as explicit missing entries.
inline TimeSeries ingest_csv(const std::string& path,
                             const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw data_error("FileNotFound", "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw data_error("UnparseableRow", "empty file '" + path + "'");
  const auto header = detail::split_csv_line(line);
  std::ptrdiff_t ts_col = -1, val_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = detail::strip(header[i]);
    if (name == schema.timestamp_column) ts_col = static_cast<std::ptrdiff_t>(i);
    if (name == schema.value_column) val_col = static_cast<std::ptrdiff_t>(i);
  }
  if (ts_col < 0 || val_col < 0)
    throw data_error("UnparseableRow",
                     "missing column '" + schema.timestamp_column + "' or '" +
                         schema.value_column + "' in '" + path + "'");

  std::map<HourIndex, double> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::strip(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() <= static_cast<std::size_t>(std::max(ts_col, val_col)))
      throw data_error("UnparseableRow",
                       "row " + std::to_string(line_no) + ": too few columns");
    HourIndex t;
    try {
      t = parse_timestamp(detail::strip(cells[static_cast<std::size_t>(ts_col)]));
    } catch (const Error& e) {
      if (e.code() == "NonHourlySpacing") throw;
      throw data_error("UnparseableRow",
                       "row " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string raw = detail::strip(cells[static_cast<std::size_t>(val_col)]);
    double v = TimeSeries::missing();
    if (!raw.empty() && raw != "NA" && raw != "nan" && raw != "NaN") {
      std::size_t pos = 0;
      try {
        v = std::stod(raw, &pos);
      } catch (...) {
        pos = 0;
      }
      if (pos != raw.size())
        throw data_error("UnparseableRow", "row " + std::to_string(line_no) +
                                               ": bad value '" + raw + "'");
    }
    if (!rows.emplace(t, v).second)
      throw data_error("DuplicateTimestamp",
                       "row " + std::to_string(line_no) +
                           ": duplicate timestamp " + format_timestamp(t));
  }
  if (rows.empty()) throw data_error("UnparseableRow", "no data rows");

  TimeSeries series;
  series.start = rows.begin()->first;
  const HourIndex end = rows.rbegin()->first;
  series.values.assign(static_cast<std::size_t>(end - series.start + 1),
                       TimeSeries::missing());
  for (const auto& [t, v] : rows)
    series.values[static_cast<std::size_t>(t - series.start)] = v;
  return series;
}

inline void export_csv(const TimeSeries& series, std::ostream& out,
                       const CsvSchema& schema = {}) {
  out << schema.timestamp_column << "," << schema.value_column << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_timestamp(series.time_at(i)) << ",";
    if (!TimeSeries::is_missing(series.values[i])) out << series.values[i];
    out << "\n";
  }
}

inline void export_csv(const TimeSeries& series, const std::string& path,
                       const CsvSchema& schema = {}) {
  std::ofstream out(path);
  if (!out) throw data_error("FileNotFound", "cannot write '" + path + "'");
  export_csv(series, out, schema);
}

/// Rolling-origin study bookkeeping: each origin is the index of the first
/// forecast hour; everything before it is history.
struct RollingStudyPlan {
  std::vector<std::size_t> origins;
  std::size_t window_length = 0;  // 0 = use full history up to the origin
  std::size_t horizon = 0;
  std::size_t ensemble_size = 0;
};

/// Spreads n_origins origins evenly over [calib_length, series_length - H].
inline RollingStudyPlan make_study_plan(std::size_t series_length,
                                        std::size_t calib_length,
                                        std::size_t n_origins, std::size_t H) {
  if (n_origins < 1) throw config_error("InsufficientData", "n_origins < 1");
  if (series_length < calib_length + H)
    throw data_error("InsufficientData",
                     "series length " + std::to_string(series_length) +
                         " < calibration " + std::to_string(calib_length) +
                         " + horizon " + std::to_string(H));
  const std::size_t last = series_length - H;
  if (n_origins > last - calib_length + 1)
    throw data_error("InsufficientData", "more origins than available hours");

  RollingStudyPlan plan;
  plan.horizon = H;
  plan.origins.reserve(n_origins);
  if (n_origins == 1) {
    plan.origins.push_back(calib_length);
  } else {
    const double step = static_cast<double>(last - calib_length) /
                        static_cast<double>(n_origins - 1);
    for (std::size_t i = 0; i < n_origins; ++i)
      plan.origins.push_back(
          calib_length +
          static_cast<std::size_t>(std::llround(step * static_cast<double>(i))));
  }
  return plan;
}

}  // namespace demandcast
