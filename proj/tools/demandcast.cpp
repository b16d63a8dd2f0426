// demandcast command line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 data error,
// 3 numeric failure.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "demandcast/demandcast.hpp"

using nlohmann::json;
namespace dc = demandcast;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dc::data_error("FileNotFound", "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw dc::config_error("InvalidConfig",
                           path + ": " + std::string(e.what()));
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dc::data_error("FileNotFound", "cannot write " + path);
  out << content;
}

dc::LoadedModel load_model(const std::string& path) {
  return dc::model_from_json(read_json_file(path));
}

struct ForecastArgs {
  std::string model_path;
  std::string data_path;
  std::string origin_str;
  std::size_t horizon = 24;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  std::string mode = "standard";
  std::string out_paths;
  std::string out_summary;
  std::vector<double> capacity;
  std::size_t capacity_window = 24;
  bool floor_at_zero = false;
};

int run_forecast(const ForecastArgs& args) {
  const dc::LoadedModel loaded = load_model(args.model_path);
  const dc::TimeSeries series = dc::ingest_csv(args.data_path);
  if (series.has_missing())
    throw dc::data_error("MissingValue",
                         "input series has gaps; fill them before forecasting");
  const dc::CalendarContext ctx(series.start,
                                series.size() + args.horizon + 1,
                                loaded.calendar, loaded.base_year);

  const dc::HourIndex origin_hour = dc::parse_timestamp(args.origin_str);
  if (origin_hour < series.start ||
      origin_hour > series.start + static_cast<dc::HourIndex>(series.size()))
    throw dc::data_error("OriginOutOfRange",
                         "forecast origin outside the available history");
  const auto origin = static_cast<std::size_t>(origin_hour - series.start);

  dc::EnsembleForecast ens =
      dc::simulate(loaded.model, series, ctx, origin, args.horizon, args.paths,
                   args.seed, args.floor_at_zero);
  const dc::DependenceMode mode = dc::dependence_mode_from_string(args.mode);
  if (mode != dc::DependenceMode::standard) ens = dc::rearrange(ens, mode);

  if (!args.out_paths.empty())
    write_text_file(args.out_paths, dc::export_ensemble_csv(ens));

  json summary = dc::ensemble_summary_json(ens, dc::default_quantile_grid());
  if (!args.capacity.empty()) {
    json exceed = json::array();
    for (double cap : args.capacity)
      exceed.push_back(
          {{"capacity", cap},
           {"window", args.capacity_window},
           {"probability",
            dc::exceedance_probability(ens, cap, args.capacity_window)}});
    summary["exceedance"] = exceed;
  }
  const std::string text = summary.dump(2) + "\n";
  if (!args.out_summary.empty())
    write_text_file(args.out_summary, text);
  else
    std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic multi-step hourly demand forecasting"};
  app.require_subcommand(1);

  // ingest: CSV in, validated regular hourly CSV out.
  auto* ingest = app.add_subcommand(
      "ingest", "Validate a CSV and write a regularized hourly series");
  std::string in_path, out_path, ts_col = "timestamp", val_col = "demand";
  ingest->add_option("input", in_path, "input CSV path")->required();
  ingest->add_option("-o,--output", out_path, "output CSV path")->required();
  ingest->add_option("--timestamp-column", ts_col, "timestamp column name");
  ingest->add_option("--value-column", val_col, "value column name");

  // simulate-data: synthetic generator.
  auto* sim = app.add_subcommand("simulate-data",
                                 "Generate a synthetic hourly series");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "generator config JSON")->required();
  sim->add_option("-o,--output", sim_out, "output CSV path")->required();
  sim->add_option("--seed", sim_seed, "RNG seed")->required();

  // fit: estimate the mean and variance models, write a model document.
  auto* fit = app.add_subcommand("fit", "Fit the demand model on a series");
  std::string fit_data, fit_model_out, fit_holidays = "default";
  std::string fit_config, fit_report;
  fit->add_option("--data", fit_data, "input CSV path")->required();
  fit->add_option("-o,--output", fit_model_out, "model JSON output")
      ->required();
  fit->add_option("--holidays", fit_holidays,
                  "holiday calendar: default, none or a CSV path");
  fit->add_option("--config", fit_config,
                  "optional JSON with lags, spline and lasso settings");
  fit->add_option("--coefficients", fit_report,
                  "optional CSV report of selected coefficients");

  // forecast: simulate an ensemble from a fitted model.
  auto* fc = app.add_subcommand("forecast", "Simulate a forecast ensemble");
  ForecastArgs fargs;
  fc->add_option("--model", fargs.model_path, "model JSON path")->required();
  fc->add_option("--data", fargs.data_path, "history CSV path")->required();
  fc->add_option("--origin", fargs.origin_str,
                 "first forecast hour (ISO-8601 timestamp)")
      ->required();
  fc->add_option("--horizon", fargs.horizon, "hours ahead");
  fc->add_option("--paths", fargs.paths, "ensemble size");
  fc->add_option("--seed", fargs.seed, "RNG seed")->required();
  fc->add_option("--mode", fargs.mode,
                 "dependence: standard, comonotone, countermonotone, "
                 "independent");
  fc->add_option("--output-paths", fargs.out_paths, "ensemble CSV output");
  fc->add_option("--output-summary", fargs.out_summary,
                 "summary JSON output (stdout if omitted)");
  fc->add_option("--capacity", fargs.capacity,
                 "report exceedance probability for these capacities");
  fc->add_option("--capacity-window", fargs.capacity_window,
                 "hours summed for the exceedance check");
  fc->add_flag("--floor-at-zero", fargs.floor_at_zero,
               "clamp simulated demand at zero");

  // study: rolling-origin evaluation with benchmark models.
  auto* study = app.add_subcommand(
      "study", "Rolling-origin forecast study with scoring reports");
  std::string study_config, study_out;
  std::uint64_t study_seed = 0;
  bool study_seed_given = false;
  std::size_t study_threads_opt = 0;
  study->add_option("--config", study_config, "study config JSON")->required();
  study->add_option("--output-dir", study_out,
                    "report directory (overrides config)");
  study->add_option("--seed", study_seed, "RNG seed (overrides config)")
      ->trigger_on_parse()
      ->each([&](const std::string&) { study_seed_given = true; });
  study->add_option("--threads", study_threads_opt,
                    "worker threads (overrides config)");

  // storage: cumulative-demand exceedance under the dependence modes.
  auto* storage = app.add_subcommand(
      "storage", "Storage capacity exceedance analysis");
  std::string storage_config;
  double storage_capacity = 0.0;
  bool storage_capacity_given = false;
  std::size_t storage_window = 0;
  storage->add_option("--config", storage_config, "study config JSON")
      ->required();
  storage->add_option("--capacity", storage_capacity,
                      "capacity threshold (overrides config)")
      ->each([&](const std::string&) { storage_capacity_given = true; });
  storage->add_option("--window", storage_window,
                      "hours summed (overrides config)");

  // score: compare an exported ensemble against realized values.
  auto* score = app.add_subcommand(
      "score", "Score an exported ensemble against realized demand");
  std::string score_paths, score_actuals, score_paths_b;
  std::size_t score_levels = 99;
  score->add_option("--ensemble", score_paths, "ensemble CSV path")
      ->required();
  score->add_option("--actuals", score_actuals, "realized demand CSV path")
      ->required();
  score->add_option("--second-ensemble", score_paths_b,
                    "optional second ensemble for a two-sample energy score");
  score->add_option("--quantile-levels", score_levels,
                    "number of equally spaced quantile levels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      const dc::TimeSeries series =
          dc::ingest_csv(in_path, dc::CsvSchema{ts_col, val_col});
      write_text_file(out_path, dc::export_csv(series, {ts_col, val_col}));
      std::cout << "rows: " << series.size()
                << " missing: " << series.missing_count() << "\n";
      return 0;
    }

    if (sim->parsed()) {
      const auto cfg = dc::synthetic_from_json(read_json_file(sim_config));
      const dc::TimeSeries series = dc::simulate_synthetic(cfg, sim_seed);
      write_text_file(sim_out, dc::export_csv(series));
      return 0;
    }

    if (fit->parsed()) {
      const dc::TimeSeries series = dc::ingest_csv(fit_data);
      if (series.has_missing())
        throw dc::data_error("MissingValue",
                             "input series has gaps; fill them before fitting");
      const dc::HolidayCalendar calendar = dc::resolve_calendar(fit_holidays);
      json cfg_json = json::object();
      if (!fit_config.empty()) cfg_json = read_json_file(fit_config);
      const dc::LagSets lags =
          dc::lag_sets_from_config(cfg_json.value("lags", json()));
      dc::SplineBasisConfig spline;
      if (cfg_json.contains("spline"))
        spline = dc::spline_from_json(cfg_json.at("spline"));
      const dc::LassoConfig lasso =
          dc::lasso_config_from_json(cfg_json.value("lasso", json::object()));
      const bool abs_var = cfg_json.value("absolute_variance", false);

      const dc::CalendarContext ctx(series.start, series.size(), calendar);
      const auto P = calendar.count();
      const dc::DemandModel model = dc::fit_demand_model(
          series, ctx, dc::FeatureSpec::mean_spec(lags, spline, P),
          dc::FeatureSpec::variance_spec(lags, spline, P), lasso, abs_var);
      write_text_file(fit_model_out,
                      dc::model_to_json(model, ctx).dump(2) + "\n");
      if (!fit_report.empty())
        write_text_file(fit_report,
                        dc::write_coefficient_report(model.mean.fit));
      std::cout << "mean active: " << model.mean.fit.active_set.size() << "/"
                << model.mean.spec.n_columns()
                << " variance active: " << model.variance.fit.active_set.size()
                << "/" << model.variance.spec.n_columns() << "\n";
      return 0;
    }

    if (fc->parsed()) return run_forecast(fargs);

    if (study->parsed()) {
      json cfg_json = read_json_file(study_config);
      if (!study_out.empty()) cfg_json["output_dir"] = study_out;
      if (study_seed_given) cfg_json["seed"] = study_seed;
      if (study_threads_opt != 0) cfg_json["threads"] = study_threads_opt;
      const dc::StudyConfig cfg = dc::study_config_from_json(cfg_json);
      const dc::StudyResult result = dc::run_study(cfg, cfg_json);
      std::cout << (result.complete ? "complete" : "incomplete") << ": "
                << result.origins.size() << " origins, "
                << result.model_names.size() << " models -> "
                << cfg.output_dir << "\n";
      return result.complete ? 0 : 3;
    }

    if (storage->parsed()) {
      json cfg_json = read_json_file(storage_config);
      if (storage_capacity_given) cfg_json["storage_capacity"] = storage_capacity;
      if (storage_window != 0) cfg_json["storage_window"] = storage_window;
      const dc::StudyConfig cfg = dc::study_config_from_json(cfg_json);
      const dc::StorageAnalysis analysis = dc::run_storage_analysis(cfg);
      json out = {
          {"capacity", analysis.capacity},
          {"window", analysis.window},
          {"n_origins", analysis.n_origins},
          {"observed_frequency", analysis.observed},
          {"probability",
           {{"standard", analysis.by_mode[0]},
            {"comonotone", analysis.by_mode[1]},
            {"countermonotone", analysis.by_mode[2]},
            {"independent", analysis.by_mode[3]}}}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (score->parsed()) {
      const dc::EnsembleForecast ens = dc::import_ensemble_csv(score_paths);
      const dc::TimeSeries actual_series = dc::ingest_csv(score_actuals);
      if (actual_series.size() < ens.horizon())
        throw dc::data_error("InsufficientData",
                             "fewer realized hours than the forecast horizon");
      std::vector<double> actuals(ens.horizon());
      for (std::size_t h = 0; h < ens.horizon(); ++h) {
        actuals[h] = actual_series.values[h];
        if (std::isnan(actuals[h]))
          throw dc::data_error("MissingValue", "realized demand has gaps");
      }
      const auto grid = dc::default_quantile_grid(score_levels);
      const dc::OriginScores s = dc::score_origin(ens, actuals, grid);
      json out = {{"es", s.es},   {"pb", s.pb}, {"mae", s.mae},
                  {"rmse", s.rmse}, {"ns", s.ns}};
      if (!score_paths_b.empty()) {
        const dc::EnsembleForecast other = dc::import_ensemble_csv(score_paths_b);
        out["es_vs_ensemble"] = dc::energy_score(ens, actuals, &other);
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const dc::Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
