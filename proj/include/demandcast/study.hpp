#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "demandcast/benchmarks.hpp"
#include "demandcast/demand_model.hpp"
#include "demandcast/ensemble.hpp"
#include "demandcast/scoring.hpp"
#include "demandcast/series.hpp"
#include "demandcast/synthetic.hpp"

namespace demandcast {

// ---------------------------------------------------------------------------
// Uniform forecaster interface: fit(window) + forecast(origin, H, M, seed).

class Forecaster {
public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  /// Refit on a trailing window (a slice of the full series ending at the
  /// forecast origin).
  virtual void fit(const TimeSeries& window, const CalendarContext& ctx) = 0;
  /// Forecast from the full series; origin is an absolute index.
  virtual EnsembleForecast forecast(const TimeSeries& series,
                                    const CalendarContext& ctx,
                                    std::size_t origin, std::size_t H,
                                    std::size_t M,
                                    std::uint64_t seed) const = 0;
};

class NaiveForecaster final : public Forecaster {
public:
  NaiveForecaster(std::string name, NaiveKind kind)
      : name_(std::move(name)), kind_(kind) {}
  std::string name() const override { return name_; }
  void fit(const TimeSeries& window, const CalendarContext& ctx) override {
    model_ = fit_naive(window, ctx, kind_);
  }
  EnsembleForecast forecast(const TimeSeries& series,
                            const CalendarContext& ctx, std::size_t origin,
                            std::size_t H, std::size_t M,
                            std::uint64_t seed) const override {
    return forecast_naive(model_, series, ctx, origin, H, M, seed);
  }

private:
  std::string name_;
  NaiveKind kind_;
  NaiveModel model_;
};

class SeasonalARForecaster final : public Forecaster {
public:
  SeasonalARForecaster(std::string name, SeasonalVariant variant,
                       std::size_t p_max)
      : name_(std::move(name)), variant_(variant), p_max_(p_max) {}
  std::string name() const override { return name_; }
  void fit(const TimeSeries& window, const CalendarContext& ctx) override {
    model_ = fit_seasonal_ar(window, ctx, variant_, p_max_);
  }
  EnsembleForecast forecast(const TimeSeries& series,
                            const CalendarContext& ctx, std::size_t origin,
                            std::size_t H, std::size_t M,
                            std::uint64_t seed) const override {
    return forecast_seasonal_ar(model_, series, ctx, origin, H, M, seed);
  }

private:
  std::string name_;
  SeasonalVariant variant_;
  std::size_t p_max_;
  SeasonalARModel model_;
};

/// The lasso ARX mean + ARCH variance model behind the shared interface.
class ArxForecaster final : public Forecaster {
public:
  ArxForecaster(std::string name, LagSets lags, SplineBasisConfig spline,
                LassoConfig lasso, bool absolute_variance = false,
                bool floor_at_zero = false)
      : name_(std::move(name)), lags_(std::move(lags)), spline_(spline),
        lasso_(lasso), absolute_variance_(absolute_variance),
        floor_at_zero_(floor_at_zero) {}
  std::string name() const override { return name_; }
  void fit(const TimeSeries& window, const CalendarContext& ctx) override {
    const auto P = ctx.calendar().count();
    model_ = fit_demand_model(window, ctx,
                              FeatureSpec::mean_spec(lags_, spline_, P),
                              FeatureSpec::variance_spec(lags_, spline_, P),
                              lasso_, absolute_variance_);
  }
  EnsembleForecast forecast(const TimeSeries& series,
                            const CalendarContext& ctx, std::size_t origin,
                            std::size_t H, std::size_t M,
                            std::uint64_t seed) const override {
    return simulate(model_, series, ctx, origin, H, M, seed, floor_at_zero_);
  }
  const DemandModel& model() const { return model_; }

private:
  std::string name_;
  LagSets lags_;
  SplineBasisConfig spline_;
  LassoConfig lasso_;
  bool absolute_variance_;
  bool floor_at_zero_;
  DemandModel model_;
};

// ---------------------------------------------------------------------------
// Study configuration (JSON document; CLI flags override keys).

struct ModelConfig {
  std::string name;
  std::string type;  // naive_mean | naive_fm | naive_mrw | ar_d | ar_w | arx
  nlohmann::json settings = nlohmann::json::object();
};

struct StudyConfig {
  std::string data_path;            // CSV input; empty if synthetic
  nlohmann::json synthetic;         // non-null: generate data instead
  std::string holidays = "default"; // "default" | "none" | path
  std::size_t calibration_length = 0;
  std::size_t n_origins = 1;
  std::size_t horizon = 24;
  std::size_t ensemble_size = 1000;
  std::size_t window_length = 0;    // 0 = full history up to the origin
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t quantile_levels = 99;
  std::size_t threads = 0;          // 0 = hardware concurrency
  std::string reference_model;
  std::string output_dir;
  std::vector<ModelConfig> models;
  double storage_capacity = 0.0;    // storage analysis inputs
  std::size_t storage_window = 24;
  std::string storage_model;        // default: first model
};

inline LassoConfig lasso_config_from_json(const nlohmann::json& j) {
  LassoConfig cfg;
  cfg.n_lambdas = j.value("n_lambdas", cfg.n_lambdas);
  cfg.lambda_min_ratio = j.value("lambda_min_ratio", cfg.lambda_min_ratio);
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.max_sweeps = j.value("max_sweeps", cfg.max_sweeps);
  cfg.validate();
  return cfg;
}

inline LagSets lag_sets_from_config(const nlohmann::json& j) {
  if (j.is_null()) return LagSets::defaults();
  LagSets sets;
  sets.mean_lags = j.value("mean", std::vector<int>{});
  sets.variance_lags = j.value("variance", std::vector<int>{});
  sets.interaction_lags = j.value("interaction", std::vector<int>{});
  if (sets.mean_lags.empty()) return LagSets::defaults();
  sets.validate();
  return sets;
}

inline SyntheticConfig synthetic_from_json(const nlohmann::json& j) {
  SyntheticConfig cfg;
  cfg.length = j.at("length").get<std::size_t>();
  if (j.contains("start")) cfg.start = parse_timestamp(j.at("start"));
  if (j.contains("hourly_profile"))
    cfg.hourly_profile = j.at("hourly_profile").get<std::vector<double>>();
  else if (j.contains("profile_level")) {
    const double level = j.at("profile_level").get<double>();
    const double amp = j.value("profile_amplitude", 0.0);
    for (int h = 0; h < 24; ++h)
      cfg.hourly_profile[static_cast<std::size_t>(h)] =
          level + amp * std::sin(2.0 * std::numbers::pi * h / 24.0);
  }
  if (cfg.hourly_profile.size() != 24)
    throw config_error("InvalidConfig", "hourly_profile must have 24 entries");
  cfg.sine_amplitude = j.value("sine_amplitude", 0.0);
  cfg.sine_period = j.value("sine_period", 24.0);
  cfg.ar = j.value("ar", std::vector<double>{});
  cfg.alpha0 = j.value("alpha0", 1.0);
  cfg.alpha = j.value("alpha", std::vector<double>{});
  if (j.value("innovation", "normal") == "student_t")
    cfg.innovation = SyntheticConfig::Innovation::student_t;
  cfg.student_df = j.value("student_df", 5.0);
  cfg.noise_scale = j.value("noise_scale", 1.0);
  return cfg;
}

inline StudyConfig study_config_from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  cfg.data_path = j.value("data", "");
  if (j.contains("synthetic")) cfg.synthetic = j.at("synthetic");
  cfg.holidays = j.value("holidays", "default");
  cfg.calibration_length = j.value("calibration_length", std::size_t{0});
  cfg.n_origins = j.value("n_origins", std::size_t{1});
  cfg.horizon = j.value("horizon", std::size_t{24});
  cfg.ensemble_size = j.value("ensemble_size", std::size_t{1000});
  cfg.window_length = j.value("window_length", std::size_t{0});
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_set = true;
  }
  cfg.quantile_levels = j.value("quantile_levels", std::size_t{99});
  cfg.threads = j.value("threads", std::size_t{0});
  cfg.reference_model = j.value("reference_model", "");
  cfg.output_dir = j.value("output_dir", "");
  cfg.storage_capacity = j.value("storage_capacity", 0.0);
  cfg.storage_window = j.value("storage_window", std::size_t{24});
  cfg.storage_model = j.value("storage_model", "");
  if (j.contains("models"))
    for (const auto& m : j.at("models")) {
      ModelConfig mc;
      mc.type = m.at("type").get<std::string>();
      mc.name = m.value("name", mc.type);
      mc.settings = m;
      cfg.models.push_back(std::move(mc));
    }
  return cfg;
}

inline HolidayCalendar resolve_calendar(const std::string& spec) {
  if (spec == "default") return default_holiday_calendar();
  if (spec == "none") return HolidayCalendar{};
  return load_holiday_calendar(spec);
}

inline std::unique_ptr<Forecaster> make_forecaster(const ModelConfig& cfg) {
  const auto& s = cfg.settings;
  if (cfg.type == "naive_mean")
    return std::make_unique<NaiveForecaster>(cfg.name, NaiveKind::mean);
  if (cfg.type == "naive_fm")
    return std::make_unique<NaiveForecaster>(cfg.name, NaiveKind::fm);
  if (cfg.type == "naive_mrw")
    return std::make_unique<NaiveForecaster>(cfg.name, NaiveKind::mrw);
  if (cfg.type == "ar_d")
    return std::make_unique<SeasonalARForecaster>(
        cfg.name, SeasonalVariant::hour_of_day,
        s.value("p_max", std::size_t{1500}));
  if (cfg.type == "ar_w")
    return std::make_unique<SeasonalARForecaster>(
        cfg.name, SeasonalVariant::hour_of_week,
        s.value("p_max", std::size_t{1500}));
  if (cfg.type == "arx") {
    SplineBasisConfig spline;
    if (s.contains("spline")) spline = spline_from_json(s.at("spline"));
    return std::make_unique<ArxForecaster>(
        cfg.name, lag_sets_from_config(s.value("lags", nlohmann::json())),
        spline,
        lasso_config_from_json(s.value("lasso", nlohmann::json::object())),
        s.value("absolute_variance", false), s.value("floor_at_zero", false));
  }
  throw config_error("UnknownModel", "unknown model type '" + cfg.type + "'");
}

// ---------------------------------------------------------------------------
// Rolling-origin study.

struct OriginResult {
  std::size_t origin = 0;
  OriginScores scores;
  bool failed = false;
  std::string error;
  // Kept only when storage analysis is requested.
  std::vector<double> cumulative_by_mode;  // per DependenceMode (4)
};

struct StudyResult {
  std::vector<std::string> model_names;
  std::vector<std::size_t> origins;
  // results[model][origin_index]
  std::vector<std::vector<OriginResult>> results;
  std::vector<double> quantile_grid;
  std::size_t horizon = 0;
  bool complete = true;
};

namespace detail {

inline void parallel_for(std::size_t count, std::size_t threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        body(i);
      }
    });
  for (auto& t : pool) t.join();
}

inline std::uint64_t task_seed(std::uint64_t seed, std::size_t model,
                               std::size_t origin) {
  std::uint64_t s = seed;
  splitmix64(s);
  s ^= 0x6A09E667F3BCC909ULL * (model + 1);
  splitmix64(s);
  s ^= 0xBB67AE8584CAA73BULL * (origin + 1);
  return splitmix64(s);
}

}  // namespace detail

/// Loads (or generates) the study data.
inline TimeSeries load_study_data(const StudyConfig& cfg) {
  if (!cfg.synthetic.is_null())
    return simulate_synthetic(synthetic_from_json(cfg.synthetic),
                              cfg.synthetic.value("seed", cfg.seed));
  if (cfg.data_path.empty())
    throw config_error("InvalidConfig", "no data path or synthetic block");
  return ingest_csv(cfg.data_path);
}

/// Refits every model at every origin on the trailing window, forecasts
/// H hours with M paths and scores against the realized demand.
/// (origin, model) tasks run on a bounded worker pool; results are indexed,
/// so outputs do not depend on scheduling.
inline StudyResult run_study_in_memory(const StudyConfig& cfg,
                                       const TimeSeries& series,
                                       const CalendarContext& ctx,
                                       bool keep_cumulative = false) {
  if (!cfg.seed_set)
    throw config_error("InvalidConfig", "study runs require an explicit seed");
  if (cfg.models.empty())
    throw config_error("InvalidConfig", "no models configured");
  if (!cfg.reference_model.empty()) {
    bool found = false;
    for (const auto& m : cfg.models)
      if (m.name == cfg.reference_model) found = true;
    if (!found)
      throw config_error("InvalidConfig", "reference model '" +
                                              cfg.reference_model +
                                              "' not in model list");
  }

  const RollingStudyPlan plan = make_study_plan(
      series.size(), cfg.calibration_length, cfg.n_origins, cfg.horizon);

  StudyResult result;
  result.horizon = cfg.horizon;
  result.origins = plan.origins;
  result.quantile_grid = default_quantile_grid(cfg.quantile_levels);
  for (const auto& m : cfg.models) result.model_names.push_back(m.name);
  result.results.assign(cfg.models.size(),
                        std::vector<OriginResult>(plan.origins.size()));

  const std::size_t n_tasks = plan.origins.size();
  detail::parallel_for(n_tasks, cfg.threads, [&](std::size_t oi) {
    const std::size_t origin = plan.origins[oi];
    const std::size_t window_begin =
        cfg.window_length > 0 && cfg.window_length < origin
            ? origin - cfg.window_length
            : 0;
    const TimeSeries window = series.slice(window_begin, origin);
    const CalendarContext window_ctx(window.start, window.size(),
                                     ctx.calendar(), ctx.base_year());
    std::vector<double> actuals(cfg.horizon);
    for (std::size_t h = 0; h < cfg.horizon; ++h)
      actuals[h] = series.values[origin + h];

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
      OriginResult& cell = result.results[mi][oi];
      cell.origin = origin;
      try {
        auto forecaster = make_forecaster(cfg.models[mi]);
        forecaster->fit(window, window_ctx);
        const auto ens =
            forecaster->forecast(series, ctx, origin, cfg.horizon,
                                 cfg.ensemble_size,
                                 detail::task_seed(cfg.seed, mi, oi));
        cell.scores = score_origin(ens, actuals, result.quantile_grid);
        if (keep_cumulative) {
          cell.cumulative_by_mode.resize(4);
          cell.cumulative_by_mode[0] =
              exceedance_probability(ens, cfg.storage_capacity,
                                     cfg.storage_window);
          for (auto mode : {DependenceMode::comonotone,
                            DependenceMode::countermonotone,
                            DependenceMode::independent})
            cell.cumulative_by_mode[static_cast<std::size_t>(mode)] =
                exceedance_probability(rearrange(ens, mode),
                                       cfg.storage_capacity,
                                       cfg.storage_window);
        }
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
    }
  });

  for (const auto& per_model : result.results)
    for (const auto& cell : per_model)
      if (cell.failed) result.complete = false;
  return result;
}

// ---------------------------------------------------------------------------
// Report emission. All numeric output uses 17 significant digits so a rerun
// with the same seed is byte-identical.

namespace detail {

inline std::string hash_hex_fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

struct ReportWriter {
  std::filesystem::path dir;
  nlohmann::json manifest_files = nlohmann::json::object();

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw data_error("FileNotFound", "cannot write " + name);
    out << content;
    manifest_files[name] = hash_hex_fnv1a(content);
  }
};

inline double improvement_pct(double value, double reference, bool lower_better) {
  if (reference == 0.0) return 0.0;
  return lower_better ? (reference - value) / reference * 100.0
                      : (value - reference) / std::abs(reference) * 100.0;
}

}  // namespace detail

/// Writes per-origin scores, Table-style aggregates with improvement
/// percentages, per-horizon and per-quantile curves, the DM-test matrix on
/// ES losses and a manifest with a content hash per artifact.
inline void write_study_reports(const StudyConfig& cfg,
                                const StudyResult& result,
                                const nlohmann::json& config_echo) {
  namespace fs = std::filesystem;
  detail::ReportWriter writer;
  writer.dir = cfg.output_dir;
  fs::create_directories(writer.dir);

  const std::size_t n_models = result.model_names.size();
  const std::size_t n_origins = result.origins.size();

  auto cell_ok = [&](std::size_t mi, std::size_t oi) {
    return !result.results[mi][oi].failed;
  };

  // per_origin_scores.csv
  {
    std::ostringstream out;
    out.precision(17);
    out << "origin,model,es,pb,mae,rmse,ns\n";
    for (std::size_t oi = 0; oi < n_origins; ++oi)
      for (std::size_t mi = 0; mi < n_models; ++mi) {
        const auto& cell = result.results[mi][oi];
        if (cell.failed) continue;
        out << cell.origin << "," << result.model_names[mi] << ","
            << cell.scores.es << "," << cell.scores.pb << "," << cell.scores.mae
            << "," << cell.scores.rmse << "," << cell.scores.ns << "\n";
      }
    writer.write("per_origin_scores.csv", out.str());
  }

  // Aggregates (arithmetic means over origins).
  std::vector<OriginScores> agg(n_models);
  std::vector<std::size_t> agg_count(n_models, 0);
  for (std::size_t mi = 0; mi < n_models; ++mi) {
    auto& a = agg[mi];
    a.pb_per_tau.assign(result.quantile_grid.size(), 0.0);
    a.pb_per_h.assign(result.horizon, 0.0);
    a.abs_err_per_h.assign(result.horizon, 0.0);
    a.sq_err_per_h.assign(result.horizon, 0.0);
    for (std::size_t oi = 0; oi < n_origins; ++oi) {
      if (!cell_ok(mi, oi)) continue;
      const auto& s = result.results[mi][oi].scores;
      a.es += s.es;
      a.pb += s.pb;
      a.mae += s.mae;
      a.rmse += s.rmse;
      a.ns += s.ns;
      for (std::size_t i = 0; i < a.pb_per_tau.size(); ++i)
        a.pb_per_tau[i] += s.pb_per_tau[i];
      for (std::size_t h = 0; h < result.horizon; ++h) {
        a.pb_per_h[h] += s.pb_per_h[h];
        a.abs_err_per_h[h] += s.abs_err_per_h[h];
        a.sq_err_per_h[h] += s.sq_err_per_h[h];
      }
      ++agg_count[mi];
    }
    const double n = std::max<std::size_t>(agg_count[mi], 1);
    a.es /= n; a.pb /= n; a.mae /= n; a.rmse /= n; a.ns /= n;
    for (auto& v : a.pb_per_tau) v /= n;
    for (auto& v : a.pb_per_h) v /= n;
    for (auto& v : a.abs_err_per_h) v /= n;
    for (auto& v : a.sq_err_per_h) v /= n;
  }

  std::size_t ref_index = 0;
  for (std::size_t mi = 0; mi < n_models; ++mi)
    if (result.model_names[mi] == cfg.reference_model) ref_index = mi;

  // aggregate.csv (Table-style summary with improvement percentages).
  {
    std::ostringstream out;
    out.precision(17);
    out << "model,n_origins,es,es_imp_pct,pb,pb_imp_pct,mae,mae_imp_pct,"
           "rmse,rmse_imp_pct,ns,ns_imp_pct\n";
    const auto& ref = agg[ref_index];
    for (std::size_t mi = 0; mi < n_models; ++mi) {
      const auto& a = agg[mi];
      out << result.model_names[mi] << "," << agg_count[mi] << ","
          << a.es << "," << detail::improvement_pct(a.es, ref.es, true) << ","
          << a.pb << "," << detail::improvement_pct(a.pb, ref.pb, true) << ","
          << a.mae << "," << detail::improvement_pct(a.mae, ref.mae, true) << ","
          << a.rmse << "," << detail::improvement_pct(a.rmse, ref.rmse, true)
          << "," << a.ns << "," << detail::improvement_pct(a.ns, ref.ns, false)
          << "\n";
    }
    writer.write("aggregate.csv", out.str());
  }

  // per_horizon.csv (error growth curves).
  {
    std::ostringstream out;
    out.precision(17);
    out << "model,h,mae,rmse,pb\n";
    for (std::size_t mi = 0; mi < n_models; ++mi)
      for (std::size_t h = 0; h < result.horizon; ++h)
        out << result.model_names[mi] << "," << (h + 1) << ","
            << agg[mi].abs_err_per_h[h] << ","
            << std::sqrt(agg[mi].sq_err_per_h[h]) << "," << agg[mi].pb_per_h[h]
            << "\n";
    writer.write("per_horizon.csv", out.str());
  }

  // per_quantile.csv (PB across the probability grid).
  {
    std::ostringstream out;
    out.precision(17);
    out << "model,tau,pb\n";
    for (std::size_t mi = 0; mi < n_models; ++mi)
      for (std::size_t i = 0; i < result.quantile_grid.size(); ++i)
        out << result.model_names[mi] << "," << result.quantile_grid[i] << ","
            << agg[mi].pb_per_tau[i] << "\n";
    writer.write("per_quantile.csv", out.str());
  }

  // dm_matrix.csv: pairwise DM tests on the per-origin ES loss series.
  {
    std::ostringstream out;
    out.precision(17);
    out << "model_a,model_b,metric,statistic,p_a_worse,p_a_better\n";
    for (std::size_t a = 0; a < n_models; ++a)
      for (std::size_t b = 0; b < n_models; ++b) {
        if (a == b) continue;
        std::vector<double> la, lb;
        for (std::size_t oi = 0; oi < n_origins; ++oi)
          if (cell_ok(a, oi) && cell_ok(b, oi)) {
            la.push_back(result.results[a][oi].scores.es);
            lb.push_back(result.results[b][oi].scores.es);
          }
        out << result.model_names[a] << "," << result.model_names[b] << ",es,";
        try {
          const auto dm = dm_test(la, lb);
          out << dm.statistic << "," << dm.p_greater << "," << dm.p_less << "\n";
        } catch (const Error&) {
          out << "nan,nan,nan\n";
        }
      }
    writer.write("dm_matrix.csv", out.str());
  }

  // manifest.json: config echo, completeness, artifact hashes.
  {
    nlohmann::json failures = nlohmann::json::array();
    for (std::size_t mi = 0; mi < n_models; ++mi)
      for (std::size_t oi = 0; oi < n_origins; ++oi)
        if (result.results[mi][oi].failed)
          failures.push_back({{"model", result.model_names[mi]},
                              {"origin", result.results[mi][oi].origin},
                              {"error", result.results[mi][oi].error}});
    nlohmann::json manifest = {{"config", config_echo},
                               {"complete", result.complete},
                               {"failures", failures},
                               {"files", writer.manifest_files}};
    std::ofstream out(writer.dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }
}

/// Full study entry point: load data, run, write reports.
inline StudyResult run_study(const StudyConfig& cfg,
                             const nlohmann::json& config_echo) {
  if (cfg.output_dir.empty())
    throw config_error("InvalidConfig", "output_dir required");
  const TimeSeries series = load_study_data(cfg);
  const CalendarContext ctx(series.start, series.size(),
                            resolve_calendar(cfg.holidays));
  StudyResult result = run_study_in_memory(cfg, series, ctx);
  write_study_reports(cfg, result, config_echo);
  return result;
}

// ---------------------------------------------------------------------------
// Storage-capacity exceedance analysis.

struct StorageAnalysis {
  double capacity = 0.0;
  std::size_t window = 0;
  double observed = 0.0;  // empirical truth probability over the origins
  // Averaged simulated exceedance probability per dependence mode.
  double by_mode[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t n_origins = 0;
};

inline StorageAnalysis run_storage_analysis(const StudyConfig& cfg) {
  if (cfg.storage_window > cfg.horizon)
    throw config_error("WindowExceedsHorizon",
                       "storage window exceeds the forecast horizon");
  StudyConfig local = cfg;
  if (!cfg.storage_model.empty()) {
    // Restrict to the requested model.
    std::vector<ModelConfig> keep;
    for (const auto& m : cfg.models)
      if (m.name == cfg.storage_model) keep.push_back(m);
    if (keep.empty())
      throw config_error("InvalidConfig", "storage model '" +
                                              cfg.storage_model +
                                              "' not configured");
    local.models = keep;
    local.reference_model = keep[0].name;
  } else if (!cfg.models.empty()) {
    local.models = {cfg.models[0]};
    local.reference_model = local.models[0].name;
  }

  const TimeSeries series = load_study_data(local);
  const CalendarContext ctx(series.start, series.size(),
                            resolve_calendar(local.holidays));
  const StudyResult result = run_study_in_memory(local, series, ctx, true);

  StorageAnalysis analysis;
  analysis.capacity = cfg.storage_capacity;
  analysis.window = cfg.storage_window;
  std::size_t observed_exceed = 0, used = 0;
  for (std::size_t oi = 0; oi < result.origins.size(); ++oi) {
    const auto& cell = result.results[0][oi];
    if (cell.failed) continue;
    ++used;
    for (int m = 0; m < 4; ++m) analysis.by_mode[m] += cell.cumulative_by_mode[static_cast<std::size_t>(m)];
    double actual = 0.0;
    for (std::size_t h = 0; h < cfg.storage_window; ++h)
      actual += series.values[result.origins[oi] + h];
    if (actual > cfg.storage_capacity) ++observed_exceed;
  }
  if (used == 0) throw numeric_error("NumericalFailure", "no usable origins");
  for (int m = 0; m < 4; ++m) analysis.by_mode[m] /= static_cast<double>(used);
  analysis.observed =
      static_cast<double>(observed_exceed) / static_cast<double>(used);
  analysis.n_origins = used;
  return analysis;
}

}  // namespace demandcast
