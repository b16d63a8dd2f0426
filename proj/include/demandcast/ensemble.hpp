#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "demandcast/calendar.hpp"
#include "demandcast/demand_model.hpp"
#include "demandcast/errors.hpp"
#include "demandcast/rng.hpp"
#include "demandcast/series.hpp"

namespace demandcast {

enum class DependenceMode { standard, comonotone, countermonotone, independent };

inline std::string to_string(DependenceMode mode) {
  switch (mode) {
    case DependenceMode::standard: return "standard";
    case DependenceMode::comonotone: return "comonotone";
    case DependenceMode::countermonotone: return "countermonotone";
    case DependenceMode::independent: return "independent";
  }
  return "?";
}

inline DependenceMode dependence_mode_from_string(const std::string& s) {
  if (s == "standard") return DependenceMode::standard;
  if (s == "comonotone") return DependenceMode::comonotone;
  if (s == "countermonotone") return DependenceMode::countermonotone;
  if (s == "independent") return DependenceMode::independent;
  throw config_error("UnknownMode", "unknown dependence mode '" + s + "'");
}

/// M simulated sample paths over the forecasting horizon. Row i is path i;
/// column h is forecast hour origin + h.
struct EnsembleForecast {
  Eigen::MatrixXd paths;  // M x H
  std::size_t origin = 0;
  std::uint64_t seed = 0;
  DependenceMode mode = DependenceMode::standard;

  std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
  std::size_t horizon() const { return static_cast<std::size_t>(paths.cols()); }
};

/// Recursive Monte-Carlo simulation: per path and hour the conditional
/// mean and variance are evaluated with simulated values standing in for
/// lags inside the horizon, then an innovation is resampled from the
/// fitted pool. Path p uses the (seed, p) substream, so the result does
/// not depend on scheduling.
inline EnsembleForecast simulate(const DemandModel& model,
                                 const TimeSeries& series,
                                 const CalendarContext& ctx, std::size_t origin,
                                 std::size_t H, std::size_t M,
                                 std::uint64_t seed,
                                 bool floor_at_zero = false) {
  if (!model.fitted) throw config_error("UnfittedModel", "model not fitted");
  if (H < 1 || M < 1)
    throw config_error("InvalidConfig", "H and M must be positive");
  if (ctx.size() < origin + H)
    throw data_error("MissingLag", "calendar context does not cover horizon");
  const auto max_mean_lag = static_cast<std::size_t>(model.mean.spec.max_lag());
  if (origin < max_mean_lag)
    throw data_error("MissingLag", "history shorter than maximum lag");
  if (series.has_missing(origin - max_mean_lag, origin))
    throw data_error("MissingLag", "missing values inside the lag window");

  const TimeSeries& residuals = model.mean.residuals;
  const std::vector<double>& pool = model.variance.innovations;
  if (pool.empty()) throw config_error("UnfittedModel", "empty innovation pool");

  // eps lag lookup on the original grid; zero before the residual window.
  auto hist_eps = [&](std::size_t idx) {
    const HourIndex t = series.time_at(idx);
    const HourIndex off = t - residuals.start;
    if (off < 0 || off >= static_cast<HourIndex>(residuals.size())) return 0.0;
    return residuals.values[static_cast<std::size_t>(off)];
  };
  const bool abs_mode = model.variance.absolute_mode;
  auto eps_to_target = [&](double eps) {
    return abs_mode ? std::abs(eps) : eps * eps;
  };

  EnsembleForecast out;
  out.origin = origin;
  out.seed = seed;
  out.paths.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(H));

  std::vector<double> sim_values(H), sim_eps(H);
  for (std::size_t p = 0; p < M; ++p) {
    Rng rng(seed, p);
    for (std::size_t h = 0; h < H; ++h) {
      const std::size_t idx = origin + h;
      auto lag_value = [&](int k) {
        const std::size_t lag_idx = idx - static_cast<std::size_t>(k);
        return lag_idx >= origin ? sim_values[lag_idx - origin]
                                 : series.values[lag_idx];
      };
      auto lag_target = [&](int k) {
        const std::size_t lag_idx = idx - static_cast<std::size_t>(k);
        return eps_to_target(lag_idx >= origin ? sim_eps[lag_idx - origin]
                                               : hist_eps(lag_idx));
      };
      const double mu = model.mean.predict(ctx, idx, lag_value);
      const double sigma2 = model.variance.predict_sigma2(ctx, idx, lag_target);
      const double z = pool[rng.uniform_below(pool.size())];
      const double eps = std::sqrt(sigma2) * z;
      double y = mu + eps;
      if (floor_at_zero) y = std::max(y, 0.0);
      sim_eps[h] = eps;
      sim_values[h] = y;
      out.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(h)) = y;
    }
  }
  return out;
}

/// Reshuffles path membership per hour without touching the per-hour
/// marginals. comonotone links equal ranks (non-crossing paths);
/// countermonotone alternates rank reversal between consecutive hours;
/// independent applies a seeded random permutation per hour.
inline EnsembleForecast rearrange(const EnsembleForecast& ens,
                                  DependenceMode mode) {
  if (mode == DependenceMode::standard)
    throw config_error("UnknownMode", "rearrange expects a non-standard mode");
  const std::size_t M = ens.n_paths();
  const std::size_t H = ens.horizon();

  EnsembleForecast out;
  out.origin = ens.origin;
  out.seed = ens.seed;
  out.mode = mode;
  out.paths.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(H));

  std::vector<double> column(M);
  std::vector<std::size_t> perm(M);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t p = 0; p < M; ++p)
      column[p] = ens.paths(static_cast<Eigen::Index>(p),
                            static_cast<Eigen::Index>(h));
    std::sort(column.begin(), column.end());
    switch (mode) {
      case DependenceMode::comonotone:
        for (std::size_t r = 0; r < M; ++r)
          out.paths(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h)) =
              column[r];
        break;
      case DependenceMode::countermonotone:
        // Path r carries rank r on even hours and rank M-1-r on odd hours.
        for (std::size_t r = 0; r < M; ++r)
          out.paths(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h)) =
              column[h % 2 == 0 ? r : M - 1 - r];
        break;
      case DependenceMode::independent: {
        Rng rng(ens.seed ^ 0xA5C9E2F1ULL, h);
        for (std::size_t r = 0; r < M; ++r) perm[r] = r;
        for (std::size_t r = M; r > 1; --r)
          std::swap(perm[r - 1],
                    perm[static_cast<std::size_t>(rng.uniform_below(r))]);
        for (std::size_t r = 0; r < M; ++r)
          out.paths(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(h)) =
              column[perm[r]];
        break;
      }
      case DependenceMode::standard: break;
    }
  }
  return out;
}

/// Fraction of sample paths whose cumulative demand over the first
/// `window` hours exceeds the capacity.
inline double exceedance_probability(const EnsembleForecast& ens,
                                     double capacity, std::size_t window) {
  if (window > ens.horizon())
    throw config_error("WindowExceedsHorizon",
                       "window " + std::to_string(window) + " > horizon " +
                           std::to_string(ens.horizon()));
  if (window == 0) return 0.0;
  std::size_t exceed = 0;
  for (std::size_t p = 0; p < ens.n_paths(); ++p) {
    const double total =
        ens.paths.row(static_cast<Eigen::Index>(p))
            .head(static_cast<Eigen::Index>(window))
            .sum();
    if (total > capacity) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(ens.n_paths());
}

/// Per-hour empirical quantiles (inverse-CDF with lower interpolation):
/// q(tau) = x_(ceil(tau * M)) of the sorted hour values.
inline Eigen::MatrixXd empirical_quantiles(const EnsembleForecast& ens,
                                           const std::vector<double>& grid) {
  if (grid.empty()) throw config_error("EmptyGrid", "empty quantile grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0 || grid[i] >= 1.0)
      throw config_error("EmptyGrid", "quantile level outside (0,1)");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw config_error("EmptyGrid", "quantile grid not strictly increasing");
  }
  const std::size_t M = ens.n_paths();
  const std::size_t H = ens.horizon();
  Eigen::MatrixXd q(static_cast<Eigen::Index>(H),
                    static_cast<Eigen::Index>(grid.size()));
  std::vector<double> column(M);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t p = 0; p < M; ++p)
      column[p] = ens.paths(static_cast<Eigen::Index>(p),
                            static_cast<Eigen::Index>(h));
    std::sort(column.begin(), column.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double pos = std::ceil(grid[i] * static_cast<double>(M)) - 1.0;
      const std::size_t idx =
          static_cast<std::size_t>(std::max(0.0, pos));
      q(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(i)) =
          column[std::min(idx, M - 1)];
    }
  }
  return q;
}

/// Long-format CSV: origin,path,h,value.
inline void export_ensemble_csv(const EnsembleForecast& ens, std::ostream& out) {
  out.precision(17);
  out << "origin,path,h,value\n";
  for (std::size_t p = 0; p < ens.n_paths(); ++p)
    for (std::size_t h = 0; h < ens.horizon(); ++h)
      out << ens.origin << "," << p << "," << (h + 1) << ","
          << ens.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(h))
          << "\n";
}

inline EnsembleForecast import_ensemble_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("origin,path,h,value", 0) != 0)
    throw data_error("UnparseableRow", "expected header origin,path,h,value");
  struct Row {
    std::size_t path, h;
    double value;
  };
  std::vector<Row> rows;
  std::size_t origin = 0;
  std::size_t max_path = 0, max_h = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Row row{};
    unsigned long long o;
    if (std::sscanf(line.c_str(), "%llu,%zu,%zu,%lf", &o, &row.path, &row.h,
                    &row.value) != 4 ||
        row.h == 0)
      throw data_error("UnparseableRow",
                       "row " + std::to_string(line_no) + ": '" + line + "'");
    origin = static_cast<std::size_t>(o);
    max_path = std::max(max_path, row.path);
    max_h = std::max(max_h, row.h);
    rows.push_back(row);
  }
  if (rows.empty()) throw data_error("UnparseableRow", "no data rows");
  if (rows.size() != (max_path + 1) * max_h)
    throw data_error("UnparseableRow", "incomplete path grid");
  EnsembleForecast ens;
  ens.origin = origin;
  ens.paths.resize(static_cast<Eigen::Index>(max_path + 1),
                   static_cast<Eigen::Index>(max_h));
  for (const auto& row : rows)
    ens.paths(static_cast<Eigen::Index>(row.path),
              static_cast<Eigen::Index>(row.h - 1)) = row.value;
  return ens;
}

inline EnsembleForecast import_ensemble_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("FileNotFound", "cannot open '" + path + "'");
  return import_ensemble_csv(in);
}

/// Compact summary: per-hour mean plus quantiles at the given grid.
inline nlohmann::json ensemble_summary_json(const EnsembleForecast& ens,
                                            const std::vector<double>& grid) {
  const Eigen::MatrixXd q = empirical_quantiles(ens, grid);
  nlohmann::json hours = nlohmann::json::array();
  for (std::size_t h = 0; h < ens.horizon(); ++h) {
    nlohmann::json quantiles = nlohmann::json::object();
    for (std::size_t i = 0; i < grid.size(); ++i)
      quantiles[std::to_string(grid[i])] =
          q(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(i));
    hours.push_back(
        {{"h", h + 1},
         {"mean", ens.paths.col(static_cast<Eigen::Index>(h)).mean()},
         {"quantiles", quantiles}});
  }
  return {{"origin", ens.origin},
          {"seed", ens.seed},
          {"mode", to_string(ens.mode)},
          {"paths", ens.n_paths()},
          {"hours", hours}};
}

}  // namespace demandcast
