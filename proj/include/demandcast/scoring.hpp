#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "demandcast/ensemble.hpp"
#include "demandcast/errors.hpp"

namespace demandcast {

inline void check_same_length(const std::vector<double>& a,
                              const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw config_error("DimensionMismatch", "forecast/actual length mismatch");
}

inline double mae(const std::vector<double>& actuals,
                  const std::vector<double>& forecast) {
  check_same_length(actuals, forecast);
  double s = 0.0;
  for (std::size_t h = 0; h < actuals.size(); ++h)
    s += std::abs(actuals[h] - forecast[h]);
  return s / static_cast<double>(actuals.size());
}

inline double rmse(const std::vector<double>& actuals,
                   const std::vector<double>& forecast) {
  check_same_length(actuals, forecast);
  double s = 0.0;
  for (std::size_t h = 0; h < actuals.size(); ++h) {
    const double e = actuals[h] - forecast[h];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(actuals.size()));
}

/// Nash-Sutcliffe efficiency: 1 - SSE / SS around the actual mean.
inline double ns(const std::vector<double>& actuals,
                 const std::vector<double>& forecast) {
  check_same_length(actuals, forecast);
  const double mean =
      std::accumulate(actuals.begin(), actuals.end(), 0.0) /
      static_cast<double>(actuals.size());
  double sse = 0.0, sst = 0.0;
  for (std::size_t h = 0; h < actuals.size(); ++h) {
    const double e = actuals[h] - forecast[h];
    sse += e * e;
    sst += (actuals[h] - mean) * (actuals[h] - mean);
  }
  if (!(sst > 0.0))
    throw numeric_error("ZeroVarianceActuals", "NS undefined for constant actuals");
  return 1.0 - sse / sst;
}

/// Point forecasts extracted from an ensemble: per-hour median for the MAE
/// (strictly proper for the median), per-hour mean for RMSE and NS.
inline std::vector<double> ensemble_hour_means(const EnsembleForecast& ens) {
  std::vector<double> out(ens.horizon());
  for (std::size_t h = 0; h < ens.horizon(); ++h)
    out[h] = ens.paths.col(static_cast<Eigen::Index>(h)).mean();
  return out;
}

inline std::vector<double> ensemble_hour_medians(const EnsembleForecast& ens) {
  const std::size_t M = ens.n_paths();
  std::vector<double> out(ens.horizon());
  std::vector<double> column(M);
  for (std::size_t h = 0; h < ens.horizon(); ++h) {
    for (std::size_t p = 0; p < M; ++p)
      column[p] = ens.paths(static_cast<Eigen::Index>(p),
                            static_cast<Eigen::Index>(h));
    std::sort(column.begin(), column.end());
    out[h] = M % 2 == 1 ? column[M / 2]
                        : 0.5 * (column[M / 2 - 1] + column[M / 2]);
  }
  return out;
}

inline std::vector<double> default_quantile_grid(std::size_t levels = 99) {
  std::vector<double> grid(levels);
  for (std::size_t i = 0; i < levels; ++i)
    grid[i] = static_cast<double>(i + 1) / static_cast<double>(levels + 1);
  return grid;
}

struct PinballResult {
  double score = 0.0;              // double average over h and tau
  std::vector<double> per_tau;     // averaged over h only
  std::vector<double> per_h;       // averaged over tau only
  bool monotone_quantiles = true;  // warning flag, score still computed
};

/// Pinball (quantile) loss of issued quantile curves against the actuals.
/// quantile_curves is H x L (as produced by empirical_quantiles).
inline PinballResult pinball(const std::vector<double>& actuals,
                             const Eigen::MatrixXd& quantile_curves,
                             const std::vector<double>& grid) {
  if (grid.empty()) throw config_error("EmptyGrid", "empty quantile grid");
  if (quantile_curves.rows() != static_cast<Eigen::Index>(actuals.size()) ||
      quantile_curves.cols() != static_cast<Eigen::Index>(grid.size()))
    throw config_error("DimensionMismatch", "quantile curve shape mismatch");

  PinballResult result;
  result.per_tau.assign(grid.size(), 0.0);
  result.per_h.assign(actuals.size(), 0.0);
  for (std::size_t h = 0; h < actuals.size(); ++h) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double q = quantile_curves(static_cast<Eigen::Index>(h),
                                       static_cast<Eigen::Index>(i));
      if (i > 0 && q < quantile_curves(static_cast<Eigen::Index>(h),
                                       static_cast<Eigen::Index>(i - 1)))
        result.monotone_quantiles = false;
      const double d = actuals[h] - q;
      const double loss = d * (grid[i] - (d < 0.0 ? 1.0 : 0.0));
      result.per_tau[i] += loss;
      result.per_h[h] += loss;
    }
  }
  for (std::size_t h = 0; h < actuals.size(); ++h)
    result.per_h[h] /= static_cast<double>(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    result.per_tau[i] /= static_cast<double>(actuals.size());
    result.score += result.per_tau[i];
  }
  result.score /= static_cast<double>(grid.size());
  return result;
}

/// Energy score estimator:
///   (1/M) sum_i ||P_i - y|| - (1/(2 M M')) sum_i sum_l ||P_i - P'_l||.
/// With one ensemble the second sum runs over the ensemble against itself.
inline double energy_score(const EnsembleForecast& ens,
                           const std::vector<double>& actuals,
                           const EnsembleForecast* second = nullptr) {
  const std::size_t M = ens.n_paths();
  const std::size_t H = ens.horizon();
  if (H != actuals.size())
    throw config_error("DimensionMismatch", "horizon/actual length mismatch");
  const EnsembleForecast& other = second ? *second : ens;
  if (other.horizon() != H)
    throw config_error("DimensionMismatch", "ensemble horizon mismatch");

  Eigen::Map<const Eigen::VectorXd> y(actuals.data(),
                                      static_cast<Eigen::Index>(H));
  double term1 = 0.0;
  for (std::size_t i = 0; i < M; ++i)
    term1 +=
        (ens.paths.row(static_cast<Eigen::Index>(i)).transpose() - y).norm();
  term1 /= static_cast<double>(M);

  double term2 = 0.0;
  const std::size_t M2 = other.n_paths();
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t l = 0; l < M2; ++l)
      term2 += (ens.paths.row(static_cast<Eigen::Index>(i)) -
                other.paths.row(static_cast<Eigen::Index>(l)))
                   .norm();
  term2 /= 2.0 * static_cast<double>(M) * static_cast<double>(M2);
  return term1 - term2;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

struct DmTestResult {
  double statistic = 0.0;
  double p_greater = 0.0;  // H1: mean differential > 0 (a worse than b)
  double p_less = 0.0;     // H1: mean differential < 0 (a better than b)
};

/// Diebold-Mariano z-test on the loss differential a - b, with a
/// Newey-West long-run variance (Bartlett weights, lag floor(N^(1/3))).
inline DmTestResult dm_test(const std::vector<double>& loss_a,
                            const std::vector<double>& loss_b) {
  check_same_length(loss_a, loss_b);
  const std::size_t n = loss_a.size();
  if (n < 10) throw config_error("DimensionMismatch", "need at least 10 losses");

  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = loss_a[i] - loss_b[i];
    mean += d[i];
  }
  mean /= static_cast<double>(n);

  const std::size_t max_lag =
      static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n))));
  double lrv = 0.0;
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double gamma = 0.0;
    for (std::size_t t = lag; t < n; ++t)
      gamma += (d[t] - mean) * (d[t - lag] - mean);
    gamma /= static_cast<double>(n);
    const double weight =
        lag == 0 ? 1.0
                 : 2.0 * (1.0 - static_cast<double>(lag) /
                                    static_cast<double>(max_lag + 1));
    lrv += weight * gamma;
  }
  if (!(lrv > 0.0))
    throw numeric_error("DegenerateDifferential",
                        "loss differential has no variation");

  DmTestResult result;
  result.statistic = mean / std::sqrt(lrv / static_cast<double>(n));
  result.p_greater = 1.0 - normal_cdf(result.statistic);
  result.p_less = normal_cdf(result.statistic);
  return result;
}

/// All per-origin metrics of one forecast, plus the per-horizon absolute
/// and squared errors needed for aggregated curves.
struct OriginScores {
  double es = 0.0;
  double pb = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double ns = 0.0;
  std::vector<double> pb_per_tau;
  std::vector<double> pb_per_h;
  std::vector<double> abs_err_per_h;   // |y - median|
  std::vector<double> sq_err_per_h;    // (y - mean)^2
};

inline OriginScores score_origin(const EnsembleForecast& ens,
                                 const std::vector<double>& actuals,
                                 const std::vector<double>& grid) {
  OriginScores s;
  const auto means = ensemble_hour_means(ens);
  const auto medians = ensemble_hour_medians(ens);
  s.es = energy_score(ens, actuals);
  const auto q = empirical_quantiles(ens, grid);
  const auto pb_result = pinball(actuals, q, grid);
  s.pb = pb_result.score;
  s.pb_per_tau = pb_result.per_tau;
  s.pb_per_h = pb_result.per_h;
  s.mae = mae(actuals, medians);
  s.rmse = rmse(actuals, means);
  s.ns = ns(actuals, means);
  s.abs_err_per_h.resize(actuals.size());
  s.sq_err_per_h.resize(actuals.size());
  for (std::size_t h = 0; h < actuals.size(); ++h) {
    s.abs_err_per_h[h] = std::abs(actuals[h] - medians[h]);
    const double e = actuals[h] - means[h];
    s.sq_err_per_h[h] = e * e;
  }
  return s;
}

}  // namespace demandcast
