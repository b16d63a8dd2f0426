#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "demandcast/calendar.hpp"
#include "demandcast/features.hpp"
#include "demandcast/lasso.hpp"
#include "demandcast/series.hpp"

namespace demandcast {

/// Conditional-mean model: lasso-BIC fit of the demand on the mean feature
/// matrix. Residuals are kept on the original hourly grid (they start
/// max_lag hours after the fit window).
struct MeanModel {
  FeatureSpec spec;
  LassoFit fit;
  TimeSeries residuals;

  /// Deterministic dot product of the coefficient vector with the feature
  /// row at context index i; lag_value(k) supplies Y_{t-k}.
  template <typename LagValueFn>
  double predict(const CalendarContext& ctx, std::size_t i,
                 LagValueFn&& lag_value) const {
    thread_local std::vector<double> row;
    row.resize(spec.n_columns());
    spec.fill_row(ctx, i, lag_value, row.data());
    return fit.predict_row(row.data());
  }
};

/// Conditional-variance model: nonnegative lasso-BIC fit of the squared
/// (or absolute) mean residuals, with fitted variances floored away from
/// zero and a rescaled standardized-innovation pool for simulation.
struct VarianceModel {
  FeatureSpec spec;
  LassoFit fit;
  double sigma_floor = 0.0;
  bool absolute_mode = false;     // regress |eps| instead of eps^2
  TimeSeries sigma2;              // fitted variances over the fit rows
  std::vector<double> innovations;  // Z pool, unit sample variance

  template <typename LagValueFn>
  double predict_sigma2(const CalendarContext& ctx, std::size_t i,
                        LagValueFn&& lag_target_value) const {
    thread_local std::vector<double> row;
    row.resize(spec.n_columns());
    spec.fill_row(ctx, i, lag_target_value, row.data());
    double v = fit.predict_row(row.data());
    if (absolute_mode) v = v * v;
    return std::max(v, sigma_floor);
  }
};

struct DemandModel {
  MeanModel mean;
  VarianceModel variance;
  bool fitted = false;
};

inline MeanModel fit_mean(const TimeSeries& series, const CalendarContext& ctx,
                          const FeatureSpec& spec, const LassoConfig& cfg) {
  if (series.size() <= static_cast<std::size_t>(spec.max_lag()))
    throw data_error("WindowTooShort",
                     "window shorter than the maximum lag " +
                         std::to_string(spec.max_lag()));
  MeanModel model;
  model.spec = spec;
  const FeatureMatrix matrix = build_matrix(spec, series, ctx);
  model.fit = fit_lasso_path(matrix, cfg);

  const Eigen::VectorXd fitted =
      (matrix.X * model.fit.beta_orig).array() + model.fit.intercept;
  model.residuals.start = series.start + static_cast<HourIndex>(matrix.first_row);
  model.residuals.values.resize(static_cast<std::size_t>(matrix.y.size()));
  for (Eigen::Index r = 0; r < matrix.y.size(); ++r)
    model.residuals.values[static_cast<std::size_t>(r)] =
        matrix.y(r) - fitted(r);
  return model;
}

/// Second estimation stage. The residual series of the mean model becomes
/// the data; its squared values are both target and lag features.
inline VarianceModel fit_variance(const MeanModel& mean_model,
                                  const CalendarContext& ctx,
                                  const FeatureSpec& spec, LassoConfig cfg,
                                  bool absolute_mode = false) {
  if (spec.target != TargetKind::variance)
    throw config_error("InvalidConfig", "variance spec required");
  cfg.nonnegative = true;

  VarianceModel model;
  model.spec = spec;
  model.absolute_mode = absolute_mode;

  const TimeSeries& eps = mean_model.residuals;
  TimeSeries target;
  target.start = eps.start;
  target.values.resize(eps.size());
  double eps_var = 0.0, eps_mean = 0.0;
  for (double e : eps.values) eps_mean += e;
  eps_mean /= static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double e = eps.values[i];
    eps_var += (e - eps_mean) * (e - eps_mean);
    target.values[i] = absolute_mode ? std::abs(e) : e * e;
  }
  eps_var /= static_cast<double>(eps.size());
  model.sigma_floor = 1e-6 * eps_var;

  CalendarContext var_ctx(target.start, target.size(), ctx.calendar(),
                          ctx.base_year());
  const FeatureMatrix matrix = build_matrix(spec, target, var_ctx);
  model.fit = fit_lasso_path(matrix, cfg);

  Eigen::VectorXd fitted =
      (matrix.X * model.fit.beta_orig).array() + model.fit.intercept;
  model.sigma2.start = target.start + static_cast<HourIndex>(matrix.first_row);
  model.sigma2.values.resize(static_cast<std::size_t>(fitted.size()));
  model.innovations.resize(static_cast<std::size_t>(fitted.size()));
  double z_sq = 0.0;
  for (Eigen::Index r = 0; r < fitted.size(); ++r) {
    double s2 = absolute_mode ? fitted(r) * fitted(r) : fitted(r);
    s2 = std::max(s2, model.sigma_floor);
    model.sigma2.values[static_cast<std::size_t>(r)] = s2;
    const std::size_t eps_idx = matrix.first_row + static_cast<std::size_t>(r);
    const double z = eps.values[eps_idx] / std::sqrt(s2);
    model.innovations[static_cast<std::size_t>(r)] = z;
    z_sq += z * z;
  }
  // Rescale the pool so the resampled innovations have unit variance.
  double z_mean = 0.0;
  for (double z : model.innovations) z_mean += z;
  z_mean /= static_cast<double>(model.innovations.size());
  double z_var = z_sq / static_cast<double>(model.innovations.size()) -
                 z_mean * z_mean;
  // The pool keeps its (near-zero) mean; only the spread is normalized.
  const double z_sd = std::sqrt(std::max(z_var, 1e-300));
  for (double& z : model.innovations) z = z_mean + (z - z_mean) / z_sd;
  return model;
}

inline DemandModel fit_demand_model(const TimeSeries& series,
                                    const CalendarContext& ctx,
                                    const FeatureSpec& mean_spec,
                                    const FeatureSpec& variance_spec,
                                    const LassoConfig& cfg,
                                    bool absolute_variance = false) {
  DemandModel model;
  model.mean = fit_mean(series, ctx, mean_spec, cfg);
  model.variance =
      fit_variance(model.mean, ctx, variance_spec, cfg, absolute_variance);
  model.fitted = true;
  return model;
}

// ---------------------------------------------------------------------------
// JSON serialization. Doubles round-trip exactly through nlohmann::json.

namespace detail {

inline nlohmann::json lag_sets_to_json(const LagSets& s) {
  return {{"mean", s.mean_lags},
          {"variance", s.variance_lags},
          {"interaction", s.interaction_lags}};
}

inline LagSets lag_sets_from_json(const nlohmann::json& j) {
  LagSets s;
  s.mean_lags = j.at("mean").get<std::vector<int>>();
  s.variance_lags = j.at("variance").get<std::vector<int>>();
  s.interaction_lags = j.at("interaction").get<std::vector<int>>();
  return s;
}

inline nlohmann::json coeffs_to_json(const LassoFit& fit) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (Eigen::Index j = 0; j < fit.beta_orig.size(); ++j)
    if (fit.beta_orig(j) != 0.0)
      coeffs[fit.names[static_cast<std::size_t>(j)]] = fit.beta_orig(j);
  return {{"intercept", fit.intercept},
          {"coefficients", coeffs},
          {"selected_lambda", fit.lambdas.empty()
                                  ? 0.0
                                  : fit.lambdas[fit.selected]}};
}

inline void coeffs_from_json(const nlohmann::json& j, const FeatureSpec& spec,
                             LassoFit& fit) {
  fit.names.clear();
  for (const auto& col : spec.columns()) fit.names.push_back(col.name);
  fit.intercept = j.at("intercept").get<double>();
  fit.beta_orig = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.names.size()));
  const auto& coeffs = j.at("coefficients");
  for (std::size_t c = 0; c < fit.names.size(); ++c) {
    const auto it = coeffs.find(fit.names[c]);
    if (it != coeffs.end()) {
      fit.beta_orig(static_cast<Eigen::Index>(c)) = it->get<double>();
      fit.active_set.push_back(fit.names[c]);
    }
  }
  fit.lambdas = {j.value("selected_lambda", 0.0)};
  fit.selected = 0;
}

inline nlohmann::json series_to_json(const TimeSeries& s) {
  return {{"start", s.start}, {"values", s.values}};
}

inline TimeSeries series_from_json(const nlohmann::json& j) {
  TimeSeries s;
  s.start = j.at("start").get<HourIndex>();
  s.values = j.at("values").get<std::vector<double>>();
  return s;
}

}  // namespace detail

inline nlohmann::json calendar_to_json(const HolidayCalendar& cal) {
  nlohmann::json rules = nlohmann::json::array();
  char buf[16];
  for (const auto& h : cal.holidays) {
    std::string rule;
    if (h.klass == HolidayClass::fixed_date) {
      std::snprintf(buf, sizeof(buf), "%02d-%02d", h.month, h.day);
      rule = buf;
    } else {
      static const char* names[7] = {"Mon", "Tue", "Wed", "Thu",
                                     "Fri", "Sat", "Sun"};
      rule = std::string(names[h.weekday]) + "+" + std::to_string(h.nth);
    }
    rules.push_back({{"name", h.name},
                     {"rule", rule},
                     {"class", h.klass == HolidayClass::fixed_date
                                   ? "fixed_date"
                                   : "fixed_weekday"}});
  }
  return rules;
}

inline HolidayCalendar calendar_from_json(const nlohmann::json& j) {
  HolidayCalendar cal;
  for (const auto& r : j)
    cal.holidays.push_back(parse_holiday_rule(r.at("name"), r.at("rule"),
                                              r.at("class")));
  return cal;
}

inline nlohmann::json spline_to_json(const SplineBasisConfig& cfg) {
  return {{"degree", cfg.degree},
          {"period", cfg.period},
          {"n_basis", cfg.n_basis}};
}

inline SplineBasisConfig spline_from_json(const nlohmann::json& j) {
  SplineBasisConfig cfg;
  cfg.degree = j.at("degree").get<int>();
  cfg.period = j.at("period").get<double>();
  cfg.n_basis = j.at("n_basis").get<int>();
  return cfg;
}

inline nlohmann::json model_to_json(const DemandModel& model,
                                    const CalendarContext& ctx) {
  return {{"format", "demandcast-model-v1"},
          {"calendar", calendar_to_json(ctx.calendar())},
          {"base_year", ctx.base_year()},
          {"lag_sets", detail::lag_sets_to_json(model.mean.spec.lag_sets)},
          {"spline", spline_to_json(model.mean.spec.spline)},
          {"n_holidays", model.mean.spec.n_holidays},
          {"mean",
           {{"fit", detail::coeffs_to_json(model.mean.fit)},
            {"residuals", detail::series_to_json(model.mean.residuals)}}},
          {"variance",
           {{"fit", detail::coeffs_to_json(model.variance.fit)},
            {"sigma_floor", model.variance.sigma_floor},
            {"absolute_mode", model.variance.absolute_mode},
            {"sigma2", detail::series_to_json(model.variance.sigma2)},
            {"innovations", model.variance.innovations}}}};
}

struct LoadedModel {
  DemandModel model;
  HolidayCalendar calendar;
  int base_year = 0;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "demandcast-model-v1")
    throw data_error("UnknownFormat", "not a demandcast model document");
  LoadedModel out;
  out.calendar = calendar_from_json(j.at("calendar"));
  out.base_year = j.at("base_year").get<int>();
  const LagSets lags = detail::lag_sets_from_json(j.at("lag_sets"));
  const SplineBasisConfig spline = spline_from_json(j.at("spline"));
  const auto n_holidays = j.at("n_holidays").get<std::size_t>();

  out.model.mean.spec = FeatureSpec::mean_spec(lags, spline, n_holidays);
  detail::coeffs_from_json(j.at("mean").at("fit"), out.model.mean.spec,
                           out.model.mean.fit);
  out.model.mean.residuals =
      detail::series_from_json(j.at("mean").at("residuals"));

  out.model.variance.spec = FeatureSpec::variance_spec(lags, spline, n_holidays);
  detail::coeffs_from_json(j.at("variance").at("fit"), out.model.variance.spec,
                           out.model.variance.fit);
  out.model.variance.sigma_floor = j.at("variance").at("sigma_floor").get<double>();
  out.model.variance.absolute_mode =
      j.at("variance").at("absolute_mode").get<bool>();
  out.model.variance.sigma2 =
      detail::series_from_json(j.at("variance").at("sigma2"));
  out.model.variance.innovations =
      j.at("variance").at("innovations").get<std::vector<double>>();
  out.model.fitted = true;
  return out;
}

}  // namespace demandcast
