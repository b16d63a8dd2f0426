#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "demandcast/errors.hpp"
#include "demandcast/features.hpp"

namespace demandcast {

struct LassoConfig {
  int n_lambdas = 100;
  double lambda_min_ratio = 1e-4;
  double tolerance = 1e-7;  // max coefficient change per sweep
  int max_sweeps = 10000;
  bool nonnegative = false;

  void validate() const {
    if (n_lambdas < 1) throw config_error("InvalidConfig", "n_lambdas < 1");
    if (lambda_min_ratio <= 0.0 || lambda_min_ratio >= 1.0)
      throw config_error("InvalidConfig", "lambda_min_ratio outside (0,1)");
    if (tolerance <= 0.0) throw config_error("InvalidConfig", "tolerance <= 0");
  }
};

/// Centering/scaling record; inverts the standardization exactly.
/// Columns with zero variance are dropped (their effect is absorbed by the
/// intercept) and remembered with kept[j] = false.
struct Standardization {
  Eigen::VectorXd col_mean, col_scale;  // per original column
  std::vector<bool> kept;
  std::vector<std::size_t> kept_to_orig;
  double y_mean = 0.0, y_scale = 1.0;
};

struct StandardizedProblem {
  Eigen::MatrixXd X;  // kept columns, mean 0, population variance 1
  Eigen::VectorXd y;  // mean 0, population variance 1
  Standardization record;
};

inline StandardizedProblem standardize(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y) {
  const auto n = X.rows();
  if (n < 2) throw data_error("SeriesTooShort", "need at least 2 rows");
  const double inv_n = 1.0 / static_cast<double>(n);

  StandardizedProblem out;
  out.record.col_mean = X.colwise().mean();
  out.record.col_scale.resize(X.cols());
  out.record.kept.assign(static_cast<std::size_t>(X.cols()), false);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var =
        (X.col(j).array() - out.record.col_mean(j)).square().sum() * inv_n;
    const double sd = std::sqrt(var);
    out.record.col_scale(j) = sd;
    if (sd > 1e-12) {
      out.record.kept[static_cast<std::size_t>(j)] = true;
      out.record.kept_to_orig.push_back(static_cast<std::size_t>(j));
    }
  }
  if (out.record.kept_to_orig.empty())
    throw data_error("AllColumnsConstant", "no column with positive variance");

  out.record.y_mean = y.mean();
  const double y_var = (y.array() - out.record.y_mean).square().sum() * inv_n;
  out.record.y_scale = std::sqrt(y_var);
  if (!(out.record.y_scale > 0.0))
    throw numeric_error("DegenerateTarget", "target has zero variance");

  out.X.resize(n, static_cast<Eigen::Index>(out.record.kept_to_orig.size()));
  for (std::size_t k = 0; k < out.record.kept_to_orig.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(out.record.kept_to_orig[k]);
    out.X.col(static_cast<Eigen::Index>(k)) =
        (X.col(j).array() - out.record.col_mean(j)) / out.record.col_scale(j);
  }
  out.y = (y.array() - out.record.y_mean) / out.record.y_scale;
  return out;
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

/// Value of (1/(2n)) ||y - X beta||^2 + lambda ||beta||_1.
inline double lasso_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& beta, double lambda) {
  const double rss = (y - X * beta).squaredNorm();
  return rss / (2.0 * static_cast<double>(X.rows())) +
         lambda * beta.cwiseAbs().sum();
}

struct CoordinateDescentResult {
  int sweeps = 0;
  bool converged = false;
};

/// Cyclic coordinate descent for the standardized problem
///   min (1/(2n)) ||y - X beta||^2 + lambda ||beta||_1   (beta >= 0 if
/// nonnegative). Columns must have x_j'x_j = n. beta is warm-start in,
/// solution out. After the first pass only the active set is swept until
/// stable, then a full sweep verifies convergence.
inline CoordinateDescentResult coordinate_descent(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
    Eigen::VectorXd& beta, const LassoConfig& cfg,
    std::vector<double>* objective_log = nullptr) {
  const auto n = X.rows();
  const auto p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::VectorXd residual = y - X * beta;

  auto update = [&](Eigen::Index j) {
    const double old = beta(j);
    const double z = old + X.col(j).dot(residual) * inv_n;
    const double next =
        cfg.nonnegative ? std::max(0.0, z - lambda) : soft_threshold(z, lambda);
    if (next != old) {
      residual.noalias() += X.col(j) * (old - next);
      beta(j) = next;
    }
    return std::abs(next - old);
  };

  CoordinateDescentResult result;
  std::vector<Eigen::Index> active;
  bool sweep_full = true;
  while (result.sweeps < cfg.max_sweeps) {
    ++result.sweeps;
    double max_delta = 0.0;
    if (sweep_full) {
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j) {
        max_delta = std::max(max_delta, update(j));
        if (beta(j) != 0.0) active.push_back(j);
      }
    } else {
      for (Eigen::Index j : active) max_delta = std::max(max_delta, update(j));
    }
    if (objective_log)
      objective_log->push_back(lasso_objective(X, y, beta, lambda));
    if (max_delta < cfg.tolerance) {
      if (sweep_full) {
        result.converged = true;
        return result;
      }
      sweep_full = true;  // verify with a full pass
    } else {
      sweep_full = active.size() == static_cast<std::size_t>(p);
    }
  }
  return result;  // MaxSweepsExceeded: best iterate, converged == false
}

/// Geometric grid from lambda_max (smallest lambda with all-zero solution)
/// down to lambda_max * lambda_min_ratio.
inline std::vector<double> lambda_path(const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y,
                                       const LassoConfig& cfg) {
  cfg.validate();
  const double inv_n = 1.0 / static_cast<double>(X.rows());
  double lambda_max = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double g = X.col(j).dot(y) * inv_n;
    lambda_max = std::max(lambda_max, cfg.nonnegative ? g : std::abs(g));
  }
  lambda_max = std::max(lambda_max, 1e-12);
  std::vector<double> path;
  path.reserve(static_cast<std::size_t>(cfg.n_lambdas));
  if (cfg.n_lambdas == 1) {
    path.push_back(lambda_max);
    return path;
  }
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * cfg.lambda_min_ratio);
  for (int i = 0; i < cfg.n_lambdas; ++i)
    path.push_back(std::exp(log_max + (log_min - log_max) * i /
                                          (cfg.n_lambdas - 1)));
  return path;
}

struct LassoFit {
  std::vector<std::string> names;  // original column names
  Standardization scaling;
  std::vector<double> lambdas;     // descending
  std::vector<Eigen::VectorXd> beta_std_path;  // kept-column space
  std::vector<double> rss;         // standardized scale
  std::vector<double> bic;
  std::size_t selected = 0;
  Eigen::VectorXd beta_std;   // kept-column space, at selected lambda
  Eigen::VectorXd beta_orig;  // original column space (dropped columns 0)
  double intercept = 0.0;
  std::vector<std::string> active_set;
  bool max_sweeps_hit = false;
  std::size_t n_rows = 0;

  double predict_row(const double* features) const {
    double v = intercept;
    for (Eigen::Index j = 0; j < beta_orig.size(); ++j)
      if (beta_orig(j) != 0.0) v += beta_orig(j) * features[j];
    return v;
  }
};

/// BIC(lambda) = n ln(RSS/n) + df ln(n) with df = active-set size.
/// Ties break toward the larger lambda (sparser model).
inline std::size_t select_bic(const std::vector<double>& bic) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < bic.size(); ++i)
    if (bic[i] < bic[best]) best = i;
  return best;
}

/// Full pipeline: standardize, descend along the lambda path with warm
/// starts, score each fit with the BIC and destandardize the winner.
inline LassoFit fit_lasso_path(const FeatureMatrix& matrix,
                               const LassoConfig& cfg) {
  cfg.validate();
  auto problem = standardize(matrix.X, matrix.y);
  const auto n = problem.X.rows();
  const auto p = problem.X.cols();
  const double log_n = std::log(static_cast<double>(n));

  LassoFit fit;
  fit.names = matrix.names;
  fit.scaling = problem.record;
  fit.n_rows = static_cast<std::size_t>(n);
  fit.lambdas = lambda_path(problem.X, problem.y, cfg);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (double lambda : fit.lambdas) {
    const auto result = coordinate_descent(problem.X, problem.y, lambda, beta, cfg);
    if (!result.converged) fit.max_sweeps_hit = true;
    fit.beta_std_path.push_back(beta);
    const double rss = (problem.y - problem.X * beta).squaredNorm();
    const int df = static_cast<int>((beta.array() != 0.0).count());
    fit.rss.push_back(rss);
    fit.bic.push_back(static_cast<double>(n) *
                          std::log(std::max(rss, 1e-300) / static_cast<double>(n)) +
                      df * log_n);
  }

  fit.selected = select_bic(fit.bic);
  fit.beta_std = fit.beta_std_path[fit.selected];
  fit.beta_orig = Eigen::VectorXd::Zero(matrix.X.cols());
  double intercept = fit.scaling.y_mean;
  for (std::size_t k = 0; k < fit.scaling.kept_to_orig.size(); ++k) {
    const auto j = static_cast<Eigen::Index>(fit.scaling.kept_to_orig[k]);
    const double b = fit.beta_std(static_cast<Eigen::Index>(k)) *
                     fit.scaling.y_scale / fit.scaling.col_scale(j);
    fit.beta_orig(j) = b;
    intercept -= b * fit.scaling.col_mean(j);
    if (b != 0.0) fit.active_set.push_back(fit.names[static_cast<std::size_t>(j)]);
  }
  fit.intercept = intercept;
  return fit;
}

/// CSV coefficient report; keys coefficient values by stable column names.
inline void write_coefficient_report(const LassoFit& fit, std::ostream& out) {
  out.precision(17);
  out << "feature,beta_standardized,beta_original\n";
  out << "(intercept),0," << fit.intercept << "\n";
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    double std_b = 0.0;
    if (fit.scaling.kept[j]) {
      const auto it = std::lower_bound(fit.scaling.kept_to_orig.begin(),
                                       fit.scaling.kept_to_orig.end(), j);
      std_b = fit.beta_std(
          static_cast<Eigen::Index>(it - fit.scaling.kept_to_orig.begin()));
    }
    out << fit.names[j] << "," << std_b << ","
        << fit.beta_orig(static_cast<Eigen::Index>(j)) << "\n";
  }
  out << "# selected_lambda," << fit.lambdas[fit.selected] << ",index="
      << fit.selected << "\n";
}

}  // namespace demandcast
