#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "demandcast/errors.hpp"
#include "demandcast/rng.hpp"
#include "demandcast/series.hpp"

namespace demandcast {

/// Synthetic process used as a test oracle:
///   Y_t = mu(t) + sum_k phi_k Y_{t-k} + eps_t,   eps_t = sigma_t Z_t,
///   sigma_t^2 = alpha0 + sum_k alpha_k eps_{t-k}^2.
struct SyntheticConfig {
  std::size_t length = 0;
  HourIndex start = hour_index(2015, 1, 1, 0);

  /// Deterministic mean: per-hour-of-day profile plus an optional sine.
  std::vector<double> hourly_profile = std::vector<double>(24, 0.0);
  double sine_amplitude = 0.0;
  double sine_period = 24.0;

  /// AR coefficients indexed by lag (index 0 <-> lag 1).
  std::vector<double> ar;

  /// ARCH coefficients; alpha.empty() with noise_scale s gives i.i.d.
  /// noise with variance alpha0.
  double alpha0 = 1.0;
  std::vector<double> alpha;

  enum class Innovation { normal, student_t };
  Innovation innovation = Innovation::normal;
  double student_df = 5.0;

  /// Multiplier on eps; 0 gives the exact deterministic recursion.
  double noise_scale = 1.0;
};

inline double synthetic_mean_at(const SyntheticConfig& cfg, HourIndex t) {
  double mu = cfg.hourly_profile[static_cast<std::size_t>(hour_of_day(t))];
  if (cfg.sine_amplitude != 0.0)
    mu += cfg.sine_amplitude *
          std::sin(2.0 * std::numbers::pi * static_cast<double>(t) /
                   cfg.sine_period);
  return mu;
}

inline TimeSeries simulate_synthetic(const SyntheticConfig& cfg,
                                     std::uint64_t seed) {
  if (cfg.length == 0) throw config_error("InsufficientData", "length 0");
  double ar_sum = 0.0;
  for (double phi : cfg.ar) ar_sum += std::abs(phi);
  if (ar_sum >= 1.0)
    throw numeric_error("UnstableProcess",
                        "sum |phi| = " + std::to_string(ar_sum) + " >= 1");
  if (cfg.alpha0 < 0.0)
    throw config_error("NegativeVarianceParams", "alpha0 < 0");
  double arch_sum = 0.0;
  for (double a : cfg.alpha) {
    if (a < 0.0) throw config_error("NegativeVarianceParams", "alpha_k < 0");
    arch_sum += a;
  }

  const std::size_t p = cfg.ar.size();
  const std::size_t q = cfg.alpha.size();
  // Pre-sample lags: Y at the deterministic mean, eps^2 at the
  // unconditional ARCH variance.
  const double eps2_uncond =
      arch_sum < 1.0 ? cfg.alpha0 / (1.0 - arch_sum) : cfg.alpha0;

  Rng rng(seed);
  auto draw_z = [&]() {
    if (cfg.innovation == SyntheticConfig::Innovation::student_t) {
      // t_nu as normal / sqrt(chi2_nu / nu), scaled to unit variance.
      const double df = cfg.student_df;
      double chi2 = 0.0;
      const int k = static_cast<int>(df);
      for (int i = 0; i < k; ++i) {
        const double n = rng.normal();
        chi2 += n * n;
      }
      const double t = rng.normal() / std::sqrt(chi2 / df);
      return t * std::sqrt((df - 2.0) / df);
    }
    return rng.normal();
  };

  TimeSeries out;
  out.start = cfg.start;
  out.values.resize(cfg.length);
  std::vector<double> eps2(cfg.length, 0.0);

  for (std::size_t i = 0; i < cfg.length; ++i) {
    const HourIndex t = cfg.start + static_cast<HourIndex>(i);
    double y = synthetic_mean_at(cfg, t);
    for (std::size_t k = 1; k <= p; ++k) {
      const double lagged =
          i >= k ? out.values[i - k]
                 : synthetic_mean_at(cfg, t - static_cast<HourIndex>(k));
      y += cfg.ar[k - 1] * lagged;
    }
    double sigma2 = cfg.alpha0;
    for (std::size_t k = 1; k <= q; ++k)
      sigma2 += cfg.alpha[k - 1] * (i >= k ? eps2[i - k] : eps2_uncond);
    const double eps =
        cfg.noise_scale * std::sqrt(std::max(sigma2, 0.0)) * draw_z();
    eps2[i] = eps * eps;
    out.values[i] = y + eps;
  }
  return out;
}

}  // namespace demandcast
