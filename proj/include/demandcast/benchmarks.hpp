#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "demandcast/calendar.hpp"
#include "demandcast/ensemble.hpp"
#include "demandcast/errors.hpp"
#include "demandcast/rng.hpp"
#include "demandcast/series.hpp"

namespace demandcast {

enum class NaiveKind { mean, fm, mrw };

inline NaiveKind naive_kind_from_string(const std::string& s) {
  if (s == "mean") return NaiveKind::mean;
  if (s == "fm") return NaiveKind::fm;
  if (s == "mrw") return NaiveKind::mrw;
  throw config_error("UnknownMode", "unknown naive kind '" + s + "'");
}

/// Day types for the Naive_FM model. Holiday takes precedence.
enum class DayType { monday, tue_thu, friday, saturday, sunday, holiday };

inline DayType day_type(const CalendarContext& ctx, std::size_t i) {
  if (ctx.is_holiday(i)) return DayType::holiday;
  switch (ctx.hour_of_week(i) / 24) {
    case 0: return DayType::monday;
    case 4: return DayType::friday;
    case 5: return DayType::saturday;
    case 6: return DayType::sunday;
    default: return DayType::tue_thu;
  }
}

inline const char* day_type_name(DayType t) {
  switch (t) {
    case DayType::monday: return "monday";
    case DayType::tue_thu: return "tue_thu";
    case DayType::friday: return "friday";
    case DayType::saturday: return "saturday";
    case DayType::sunday: return "sunday";
    case DayType::holiday: return "holiday";
  }
  return "?";
}

/// Naive reference forecasters: per-hour arithmetic averages (mean),
/// the same conditioned on day type (fm), and the non-parametric mixed
/// random walk (mrw).
struct NaiveModel {
  NaiveKind kind = NaiveKind::mean;
  // mean: profile[0][hod]; fm: profile[day_type][hod]; mrw: unused.
  std::vector<std::vector<double>> profile;
  std::vector<double> residual_pool;

  std::size_t parameter_count() const {
    if (kind == NaiveKind::mrw) return 0;
    return kind == NaiveKind::mean ? 24 : 6 * 24;
  }
};

inline NaiveModel fit_naive(const TimeSeries& series,
                            const CalendarContext& ctx, NaiveKind kind) {
  if (ctx.start() != series.start || ctx.size() < series.size())
    throw config_error("ContextMismatch", "context not aligned with series");
  if (series.size() < 168)
    throw data_error("InsufficientData", "need at least one full week");
  if (series.has_missing(0, series.size()))
    throw data_error("MissingValue", "fit window contains missing values");

  NaiveModel model;
  model.kind = kind;

  if (kind == NaiveKind::mrw) {
    // No parameters; the pool holds the in-sample one-step rule errors.
    for (std::size_t i = 168; i < series.size(); ++i) {
      const DayType type = day_type(ctx, i);
      const std::size_t lag = (type == DayType::monday ||
                               type == DayType::saturday ||
                               type == DayType::sunday)
                                  ? 168
                                  : 24;
      model.residual_pool.push_back(series.values[i] - series.values[i - lag]);
    }
    return model;
  }

  const std::size_t n_buckets = kind == NaiveKind::mean ? 1 : 6;
  std::vector<std::vector<double>> sums(n_buckets, std::vector<double>(24, 0.0));
  std::vector<std::vector<std::size_t>> counts(n_buckets,
                                               std::vector<std::size_t>(24, 0));
  auto bucket = [&](std::size_t i) {
    return kind == NaiveKind::mean
               ? std::size_t{0}
               : static_cast<std::size_t>(day_type(ctx, i));
  };
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto b = bucket(i);
    const auto h = static_cast<std::size_t>(ctx.hour_of_day(i));
    sums[b][h] += series.values[i];
    counts[b][h] += 1;
  }
  model.profile.assign(n_buckets, std::vector<double>(24, 0.0));
  for (std::size_t b = 0; b < n_buckets; ++b)
    for (std::size_t h = 0; h < 24; ++h) {
      if (counts[b][h] == 0) {
        // No holiday inside the window: fall back to the Sunday profile.
        if (kind == NaiveKind::fm && b == static_cast<std::size_t>(DayType::holiday)) {
          const auto s = static_cast<std::size_t>(DayType::sunday);
          if (counts[s][h] > 0) {
            model.profile[b][h] = sums[s][h] / static_cast<double>(counts[s][h]);
            continue;
          }
        }
        throw data_error("EmptyBucket",
                         std::string("no observations for bucket ") +
                             (kind == NaiveKind::mean
                                  ? "hour"
                                  : day_type_name(static_cast<DayType>(b))) +
                             "/" + std::to_string(h));
      }
      model.profile[b][h] = sums[b][h] / static_cast<double>(counts[b][h]);
    }
  for (std::size_t i = 0; i < series.size(); ++i)
    model.residual_pool.push_back(
        series.values[i] -
        model.profile[bucket(i)][static_cast<std::size_t>(ctx.hour_of_day(i))]);
  return model;
}

/// Point path plus i.i.d. bootstrap residual draws per hour per path.
inline EnsembleForecast forecast_naive(const NaiveModel& model,
                                       const TimeSeries& series,
                                       const CalendarContext& ctx,
                                       std::size_t origin, std::size_t H,
                                       std::size_t M, std::uint64_t seed) {
  if (model.kind == NaiveKind::mrw && origin < 168)
    throw data_error("MissingLag", "mrw needs 168 hours of history");
  if (ctx.size() < origin + H)
    throw data_error("MissingLag", "context does not cover horizon");

  std::vector<double> point(H);
  for (std::size_t h = 0; h < H; ++h) {
    const std::size_t idx = origin + h;
    const auto hod = static_cast<std::size_t>(ctx.hour_of_day(idx));
    switch (model.kind) {
      case NaiveKind::mean: point[h] = model.profile[0][hod]; break;
      case NaiveKind::fm:
        point[h] = model.profile[static_cast<std::size_t>(day_type(ctx, idx))][hod];
        break;
      case NaiveKind::mrw: {
        const DayType type = day_type(ctx, idx);
        const std::size_t lag = (type == DayType::monday ||
                                 type == DayType::saturday ||
                                 type == DayType::sunday)
                                    ? 168
                                    : 24;
        const std::size_t lag_idx = idx - lag;
        point[h] = lag_idx >= origin ? point[lag_idx - origin]
                                     : series.values[lag_idx];
        break;
      }
    }
  }

  EnsembleForecast out;
  out.origin = origin;
  out.seed = seed;
  out.paths.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(H));
  const auto& pool = model.residual_pool;
  for (std::size_t p = 0; p < M; ++p) {
    Rng rng(seed, p);
    for (std::size_t h = 0; h < H; ++h)
      out.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(h)) =
          point[h] + (pool.empty() ? 0.0 : pool[rng.uniform_below(pool.size())]);
  }
  return out;
}

enum class SeasonalVariant { hour_of_day, hour_of_week };

/// AR(p) on the seasonal-mean-adjusted series, estimated by Yule-Walker
/// with the order picked by BIC over 0..p_max.
struct SeasonalARModel {
  SeasonalVariant variant = SeasonalVariant::hour_of_week;
  std::vector<double> seasonal_mean;  // 24 or 168 buckets
  double adjustment_mean = 0.0;       // mean of the deseasonalized series
  std::vector<double> phi;            // selected order p = phi.size()
  double sigma2 = 0.0;                // innovation variance at selected order
  std::vector<double> residual_pool;

  std::size_t bucket(const CalendarContext& ctx, std::size_t i) const {
    return static_cast<std::size_t>(variant == SeasonalVariant::hour_of_day
                                        ? ctx.hour_of_day(i)
                                        : ctx.hour_of_week(i));
  }
};

inline SeasonalARModel fit_seasonal_ar(const TimeSeries& series,
                                       const CalendarContext& ctx,
                                       SeasonalVariant variant,
                                       std::size_t p_max = 1500) {
  if (ctx.start() != series.start || ctx.size() < series.size())
    throw config_error("ContextMismatch", "context not aligned with series");
  const std::size_t n = series.size();
  const std::size_t n_buckets =
      variant == SeasonalVariant::hour_of_day ? 24 : 168;
  if (n < 2 * n_buckets)
    throw data_error("SeriesTooShort", "need at least two full seasons");
  if (series.has_missing(0, n))
    throw data_error("MissingValue", "fit window contains missing values");
  p_max = std::min(p_max, n / 2);

  SeasonalARModel model;
  model.variant = variant;
  model.seasonal_mean.assign(n_buckets, 0.0);
  std::vector<std::size_t> counts(n_buckets, 0);
  for (std::size_t i = 0; i < n; ++i) {
    model.seasonal_mean[model.bucket(ctx, i)] += series.values[i];
    counts[model.bucket(ctx, i)] += 1;
  }
  for (std::size_t b = 0; b < n_buckets; ++b) {
    if (counts[b] == 0)
      throw data_error("EmptyBucket", "no observations for bucket " +
                                          std::to_string(b));
    model.seasonal_mean[b] /= static_cast<double>(counts[b]);
  }

  std::vector<double> x(n);
  double x_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = series.values[i] - model.seasonal_mean[model.bucket(ctx, i)];
    x_mean += x[i];
  }
  x_mean /= static_cast<double>(n);
  model.adjustment_mean = x_mean;
  for (double& v : x) v -= x_mean;

  // Sample autocovariances (biased, 1/n).
  std::vector<double> acov(p_max + 1, 0.0);
  for (std::size_t k = 0; k <= p_max; ++k) {
    double s = 0.0;
    for (std::size_t t = k; t < n; ++t) s += x[t] * x[t - k];
    acov[k] = s / static_cast<double>(n);
  }
  if (!(acov[0] > 0.0))
    throw numeric_error("SingularToeplitz", "zero-variance series");

  // Levinson-Durbin recursion; BIC(p) = n ln(sigma2_p) + p ln(n), ties
  // toward the smaller order.
  const double log_n = std::log(static_cast<double>(n));
  double sigma2 = acov[0];
  std::vector<double> phi, prev;
  double best_bic = static_cast<double>(n) * std::log(sigma2);
  std::size_t best_p = 0;
  std::vector<double> best_phi;
  double best_sigma2 = sigma2;
  for (std::size_t m = 1; m <= p_max; ++m) {
    double num = acov[m];
    for (std::size_t k = 1; k < m; ++k) num -= phi[k - 1] * acov[m - k];
    if (!(sigma2 > 0.0))
      throw numeric_error("SingularToeplitz",
                          "non-positive innovation variance at order " +
                              std::to_string(m));
    const double kappa = num / sigma2;
    prev = phi;
    phi.resize(m);
    phi[m - 1] = kappa;
    for (std::size_t k = 1; k < m; ++k)
      phi[k - 1] = prev[k - 1] - kappa * prev[m - 1 - k];
    sigma2 *= (1.0 - kappa * kappa);
    const double bic = static_cast<double>(n) * std::log(std::max(sigma2, 1e-300)) +
                       static_cast<double>(m) * log_n;
    if (bic < best_bic) {
      best_bic = bic;
      best_p = m;
      best_phi = phi;
      best_sigma2 = sigma2;
    }
  }
  model.phi = best_phi;
  model.sigma2 = best_sigma2;

  for (std::size_t t = best_p; t < n; ++t) {
    double pred = 0.0;
    for (std::size_t k = 1; k <= best_p; ++k) pred += model.phi[k - 1] * x[t - k];
    model.residual_pool.push_back(x[t] - pred);
  }
  return model;
}

/// Recursive mean-adjusted AR recursion per path with bootstrap residual
/// draws; the seasonal profile is re-added on output.
inline EnsembleForecast forecast_seasonal_ar(const SeasonalARModel& model,
                                             const TimeSeries& series,
                                             const CalendarContext& ctx,
                                             std::size_t origin, std::size_t H,
                                             std::size_t M, std::uint64_t seed) {
  const std::size_t p = model.phi.size();
  if (origin < p) throw data_error("MissingLag", "history shorter than order p");
  if (ctx.size() < origin + H)
    throw data_error("MissingLag", "context does not cover horizon");

  // Deseasonalized, mean-adjusted history needed for the recursion.
  std::vector<double> hist(p);
  for (std::size_t k = 0; k < p; ++k) {
    const std::size_t idx = origin - p + k;
    hist[k] = series.values[idx] - model.seasonal_mean[model.bucket(ctx, idx)] -
              model.adjustment_mean;
  }

  EnsembleForecast out;
  out.origin = origin;
  out.seed = seed;
  out.paths.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(H));
  const auto& pool = model.residual_pool;
  std::vector<double> sim(H);
  for (std::size_t path = 0; path < M; ++path) {
    Rng rng(seed, path);
    for (std::size_t h = 0; h < H; ++h) {
      double xc = 0.0;
      for (std::size_t k = 1; k <= p; ++k)
        xc += model.phi[k - 1] *
              (h >= k ? sim[h - k] : hist[p - (k - h)]);
      if (!pool.empty()) xc += pool[rng.uniform_below(pool.size())];
      sim[h] = xc;
      const std::size_t idx = origin + h;
      out.paths(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(h)) =
          xc + model.adjustment_mean + model.seasonal_mean[model.bucket(ctx, idx)];
    }
  }
  return out;
}

}  // namespace demandcast
