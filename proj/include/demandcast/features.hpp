#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "demandcast/bspline.hpp"
#include "demandcast/calendar.hpp"
#include "demandcast/errors.hpp"
#include "demandcast/series.hpp"

namespace demandcast {

/// Lag index sets: I for the mean model, K for the variance model,
/// S for the interaction terms. K and S must be subsets of I.
struct LagSets {
  std::vector<int> mean_lags;         // I
  std::vector<int> variance_lags;     // K
  std::vector<int> interaction_lags;  // S

  static LagSets defaults() {
    LagSets sets;
    for (int k = 1; k <= 361; ++k) sets.mean_lags.push_back(k);
    for (int base : {504, 672, 840, 1008, 1176, 1344}) {
      sets.mean_lags.push_back(base);
      sets.mean_lags.push_back(base + 1);
    }
    for (int k = 1; k <= 361; ++k) sets.variance_lags.push_back(k);
    sets.interaction_lags = {1, 2, 24, 25, 168, 169};
    return sets;
  }

  void validate() const {
    auto contains = [&](int lag) {
      for (int k : mean_lags)
        if (k == lag) return true;
      return false;
    };
    for (int k : variance_lags)
      if (!contains(k))
        throw config_error("InvalidLagSets", "variance lag " +
                                                 std::to_string(k) +
                                                 " not in mean lag set");
    for (int k : interaction_lags)
      if (!contains(k))
        throw config_error("InvalidLagSets", "interaction lag " +
                                                 std::to_string(k) +
                                                 " not in mean lag set");
  }
};

enum class TargetKind { mean, variance };

/// One realized regressor column: a stable name plus the parameters the
/// evaluator needs.
struct ColumnDef {
  enum class Kind {
    constant,
    hod,       // 1{hour_of_day == index - 1}
    hod_cum,   // 1{hour_of_day >= index - 1}
    how,       // 1{hour_of_week == index - 1}
    b_cum,     // cumulative periodic spline basis
    b,         // periodic spline basis
    hd,        // 1 on all 24 hours of holiday #index
    fwh,       // hod dummy gated to fixed-weekday-holiday days
    fwh_cum,
    fdh,       // hod dummy gated to fixed-date-holiday days
    fdh_cum,
    lag,        // Y_{t - index}
    lag_hod,    // Y_{t - lag} * 1{hour_of_day == index - 1}
    lag_hd,     // Y_{t - lag} * 1{holiday == index - 1}
  };
  Kind kind;
  int index = 0;
  int lag = 0;
  std::string name;
};

/// Declarative description of a feature matrix (Table-style block layout).
/// The mean spec realizes 856 columns and the variance spec 612 under
/// default lag sets, 4 spline basis functions and 11 holidays.
class FeatureSpec {
public:
  TargetKind target = TargetKind::mean;
  LagSets lag_sets = LagSets::defaults();
  SplineBasisConfig spline;
  std::size_t n_holidays = 11;

  static FeatureSpec mean_spec(LagSets lags = LagSets::defaults(),
                               SplineBasisConfig spline = {},
                               std::size_t n_holidays = 11) {
    FeatureSpec spec;
    spec.target = TargetKind::mean;
    spec.lag_sets = std::move(lags);
    spec.spline = spline;
    spec.n_holidays = n_holidays;
    spec.build_columns();
    return spec;
  }

  static FeatureSpec variance_spec(LagSets lags = LagSets::defaults(),
                                   SplineBasisConfig spline = {},
                                   std::size_t n_holidays = 11) {
    FeatureSpec spec;
    spec.target = TargetKind::variance;
    spec.lag_sets = std::move(lags);
    spec.spline = spline;
    spec.n_holidays = n_holidays;
    spec.build_columns();
    return spec;
  }

  const std::vector<ColumnDef>& columns() const { return columns_; }
  std::size_t n_columns() const { return columns_.size(); }

  int max_lag() const {
    int m = 0;
    const auto& lags = target == TargetKind::mean ? lag_sets.mean_lags
                                                  : lag_sets.variance_lags;
    for (int k : lags) m = std::max(m, k);
    if (target == TargetKind::mean)
      for (int k : lag_sets.interaction_lags) m = std::max(m, k);
    return m;
  }

  /// Fills one feature row at context index i. lag_value(k) must return the
  /// series value k hours before index i.
  template <typename LagValueFn>
  void fill_row(const CalendarContext& ctx, std::size_t i,
                LagValueFn&& lag_value, double* row) const {
    const int hod = ctx.hour_of_day(i);
    const int how = ctx.hour_of_week(i);
    const int holiday = ctx.holiday(i);
    const bool on_fwh =
        holiday >= 0 && ctx.holiday_class(i) == HolidayClass::fixed_weekday;
    const bool on_fdh =
        holiday >= 0 && ctx.holiday_class(i) == HolidayClass::fixed_date;
    const auto basis = periodic_bspline_basis(ctx.position_in_year(i), spline);
    std::vector<double> basis_cum = basis;
    for (std::size_t l = 1; l < basis_cum.size(); ++l)
      basis_cum[l] += basis_cum[l - 1];

    using Kind = ColumnDef::Kind;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      const ColumnDef& col = columns_[c];
      double v = 0.0;
      switch (col.kind) {
        case Kind::constant: v = 1.0; break;
        case Kind::hod: v = hod == col.index - 1 ? 1.0 : 0.0; break;
        case Kind::hod_cum: v = hod >= col.index - 1 ? 1.0 : 0.0; break;
        case Kind::how: v = how == col.index - 1 ? 1.0 : 0.0; break;
        case Kind::b_cum:
          v = basis_cum[static_cast<std::size_t>(col.index - 1)];
          break;
        case Kind::b:
          v = basis[static_cast<std::size_t>(col.index - 1)];
          break;
        case Kind::hd: v = holiday == col.index - 1 ? 1.0 : 0.0; break;
        case Kind::fwh:
          v = on_fwh && hod == col.index - 1 ? 1.0 : 0.0;
          break;
        case Kind::fwh_cum:
          v = on_fwh && hod >= col.index - 1 ? 1.0 : 0.0;
          break;
        case Kind::fdh:
          v = on_fdh && hod == col.index - 1 ? 1.0 : 0.0;
          break;
        case Kind::fdh_cum:
          v = on_fdh && hod >= col.index - 1 ? 1.0 : 0.0;
          break;
        case Kind::lag: v = lag_value(col.index); break;
        case Kind::lag_hod:
          v = hod == col.index - 1 ? lag_value(col.lag) : 0.0;
          break;
        case Kind::lag_hd:
          v = holiday == col.index - 1 ? lag_value(col.lag) : 0.0;
          break;
      }
      row[c] = v;
    }
  }

private:
  std::vector<ColumnDef> columns_;

  void add(ColumnDef::Kind kind, int index, int lag, std::string name) {
    columns_.push_back({kind, index, lag, std::move(name)});
  }

  // Dropped categories keep the blocks clear of exact collinearity with the
  // constant: plain dummies drop hour 0, cumulative HoD additionally drops
  // the always-on first index, and the spline blocks drop the last basis.
  void build_columns() {
    lag_sets.validate();
    spline.validate();
    columns_.clear();
    const int P = static_cast<int>(n_holidays);
    using Kind = ColumnDef::Kind;

    add(Kind::constant, 0, 0, "const");
    for (int i = 2; i <= 24; ++i)
      add(Kind::hod, i, 0, "HoD_" + std::to_string(i));
    if (target == TargetKind::mean)
      for (int i = 2; i <= 23; ++i)
        add(Kind::hod_cum, i, 0, "HoDcum_" + std::to_string(i));
    for (int i = 2; i <= 168; ++i)
      add(Kind::how, i, 0, "HoW_" + std::to_string(i));
    for (int l = 1; l < spline.n_basis; ++l) {
      if (target == TargetKind::mean)
        add(Kind::b_cum, l, 0, "Bcum_" + std::to_string(l));
      else
        add(Kind::b, l, 0, "B_" + std::to_string(l));
    }
    if (P > 0) {
      for (int k = 1; k <= P; ++k)
        add(Kind::hd, k, 0, "HD_" + std::to_string(k));
      for (int i = 2; i <= 24; ++i) {
        if (target == TargetKind::mean)
          add(Kind::fwh_cum, i, 0, "FWHcum_" + std::to_string(i));
        else
          add(Kind::fwh, i, 0, "FWH_" + std::to_string(i));
      }
      for (int i = 2; i <= 24; ++i) {
        if (target == TargetKind::mean)
          add(Kind::fdh_cum, i, 0, "FDHcum_" + std::to_string(i));
        else
          add(Kind::fdh, i, 0, "FDH_" + std::to_string(i));
      }
    }
    const auto& lags = target == TargetKind::mean ? lag_sets.mean_lags
                                                  : lag_sets.variance_lags;
    for (int k : lags) add(Kind::lag, k, 0, "lag_" + std::to_string(k));
    if (target == TargetKind::mean) {
      for (int s : lag_sets.interaction_lags)
        for (int k = 1; k <= 24; ++k)
          add(Kind::lag_hod, k, s,
              "lag" + std::to_string(s) + "_x_HoD" + std::to_string(k));
      for (int s : lag_sets.interaction_lags)
        for (int k = 1; k <= P; ++k)
          add(Kind::lag_hd, k, s,
              "lag" + std::to_string(s) + "_x_HD" + std::to_string(k));
    }
  }
};

/// Realized numeric design matrix. Row r corresponds to series index
/// first_row + r; the target is the series value at that index.
struct FeatureMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::size_t first_row = 0;
};

/// Assembles the full matrix over all rows with complete lag history.
/// The context must start at the same hour as the series.
inline FeatureMatrix build_matrix(const FeatureSpec& spec,
                                  const TimeSeries& series,
                                  const CalendarContext& ctx) {
  if (ctx.start() != series.start)
    throw config_error("ContextMismatch",
                       "calendar context not aligned with series");
  const std::size_t max_lag = static_cast<std::size_t>(spec.max_lag());
  if (series.size() <= max_lag)
    throw data_error("SeriesTooShort",
                     "need more than " + std::to_string(max_lag) + " hours");
  if (series.has_missing(0, series.size()))
    throw data_error("MissingValue",
                     "estimation window contains missing values");

  FeatureMatrix out;
  out.first_row = max_lag;
  out.names.reserve(spec.n_columns());
  for (const auto& col : spec.columns()) out.names.push_back(col.name);

  const std::size_t rows = series.size() - max_lag;
  out.X.resize(static_cast<Eigen::Index>(rows),
               static_cast<Eigen::Index>(spec.n_columns()));
  out.y.resize(static_cast<Eigen::Index>(rows));
  std::vector<double> row(spec.n_columns());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = max_lag + r;
    spec.fill_row(ctx, t,
                  [&](int k) { return series.values[t - static_cast<std::size_t>(k)]; },
                  row.data());
    for (std::size_t c = 0; c < row.size(); ++c)
      out.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    out.y(static_cast<Eigen::Index>(r)) = series.values[t];
  }
  return out;
}

/// A named block of feature columns over every context index; convenience
/// views used by tests and reports.
struct FeatureBlock {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

namespace detail {

template <typename Filter>
inline FeatureBlock block_from_spec(const FeatureSpec& spec,
                                    const CalendarContext& ctx,
                                    const TimeSeries* series, Filter&& keep) {
  std::vector<std::size_t> cols;
  FeatureBlock out;
  for (std::size_t c = 0; c < spec.columns().size(); ++c)
    if (keep(spec.columns()[c])) {
      cols.push_back(c);
      out.names.push_back(spec.columns()[c].name);
    }
  const std::size_t max_lag =
      series ? static_cast<std::size_t>(spec.max_lag()) : 0;
  if (series && series->size() <= max_lag)
    throw data_error("SeriesTooShort",
                     "need more than " + std::to_string(max_lag) + " hours");
  const std::size_t rows = (series ? series->size() : ctx.size()) - max_lag;
  out.values.resize(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols.size()));
  std::vector<double> row(spec.n_columns());
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = max_lag + r;
    spec.fill_row(ctx, t,
                  [&](int k) {
                    return series ? series->values[t - static_cast<std::size_t>(k)]
                                  : 0.0;
                  },
                  row.data());
    for (std::size_t j = 0; j < cols.size(); ++j)
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          row[cols[j]];
  }
  return out;
}

}  // namespace detail

inline FeatureBlock hod_dummies(const CalendarContext& ctx, bool cumulative) {
  auto spec = FeatureSpec::mean_spec(LagSets{}, {}, 0);
  const auto kind =
      cumulative ? ColumnDef::Kind::hod_cum : ColumnDef::Kind::hod;
  return detail::block_from_spec(spec, ctx, nullptr,
                                 [&](const ColumnDef& c) { return c.kind == kind; });
}

inline FeatureBlock how_dummies(const CalendarContext& ctx) {
  auto spec = FeatureSpec::mean_spec(LagSets{}, {}, 0);
  return detail::block_from_spec(spec, ctx, nullptr, [](const ColumnDef& c) {
    return c.kind == ColumnDef::Kind::how;
  });
}

/// HD plus the class-gated hourly FWH/FDH dummies (cumulative or plain).
inline FeatureBlock holiday_dummies(const CalendarContext& ctx,
                                    bool cumulative) {
  const std::size_t P = ctx.calendar().count();
  auto spec = cumulative ? FeatureSpec::mean_spec(LagSets{}, {}, P)
                         : FeatureSpec::variance_spec(LagSets{}, {}, P);
  using Kind = ColumnDef::Kind;
  return detail::block_from_spec(spec, ctx, nullptr, [](const ColumnDef& c) {
    return c.kind == Kind::hd || c.kind == Kind::fwh || c.kind == Kind::fdh ||
           c.kind == Kind::fwh_cum || c.kind == Kind::fdh_cum;
  });
}

/// Full (undroppped) periodic spline basis, one column per basis function.
inline FeatureBlock bspline_basis(const CalendarContext& ctx,
                                  const SplineBasisConfig& cfg,
                                  bool cumulative = false) {
  cfg.validate();
  FeatureBlock out;
  for (int l = 1; l <= cfg.n_basis; ++l)
    out.names.push_back((cumulative ? "Bcum_" : "B_") + std::to_string(l));
  out.values.resize(static_cast<Eigen::Index>(ctx.size()),
                    static_cast<Eigen::Index>(cfg.n_basis));
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const auto basis =
        cumulative ? periodic_bspline_basis_cumulative(ctx.position_in_year(i), cfg)
                   : periodic_bspline_basis(ctx.position_in_year(i), cfg);
    for (int l = 0; l < cfg.n_basis; ++l)
      out.values(static_cast<Eigen::Index>(i), l) =
          basis[static_cast<std::size_t>(l)];
  }
  return out;
}

inline FeatureBlock lag_block(const TimeSeries& series,
                              const std::vector<int>& lags) {
  LagSets sets;
  sets.mean_lags = lags;
  auto spec = FeatureSpec::mean_spec(sets, {}, 0);
  return detail::block_from_spec(spec, CalendarContext(series.start, series.size()),
                                 &series, [](const ColumnDef& c) {
                                   return c.kind == ColumnDef::Kind::lag;
                                 });
}

inline FeatureBlock interaction_block(const TimeSeries& series,
                                      const CalendarContext& ctx,
                                      const std::vector<int>& interaction_lags) {
  LagSets sets;
  sets.mean_lags = interaction_lags;
  sets.interaction_lags = interaction_lags;
  auto spec = FeatureSpec::mean_spec(sets, {}, ctx.calendar().count());
  using Kind = ColumnDef::Kind;
  return detail::block_from_spec(spec, ctx, &series, [](const ColumnDef& c) {
    return c.kind == Kind::lag_hod || c.kind == Kind::lag_hd;
  });
}

}  // namespace demandcast
