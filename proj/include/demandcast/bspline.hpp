#pragma once

#include <cmath>
#include <vector>

#include "demandcast/calendar.hpp"
#include "demandcast/errors.hpp"

namespace demandcast {

/// Periodic B-spline basis on equidistant knots: n_basis translated copies
/// of the cardinal spline of odd degree, knot spacing period / n_basis,
/// wrapped by the period. The basis is a partition of unity.
struct SplineBasisConfig {
  int degree = 3;
  double period = kAnnualPeriodHours;
  int n_basis = 4;

  double knot_spacing() const { return period / n_basis; }

  void validate() const {
    if (degree < 1 || degree % 2 == 0)
      throw config_error("InvalidDegree",
                         "spline degree must be odd and positive, got " +
                             std::to_string(degree));
    if (n_basis < degree + 1)
      throw config_error("InsufficientSpacing",
                         "need at least degree+1 basis functions per period");
    if (period <= 0.0)
      throw config_error("InsufficientSpacing", "period must be positive");
  }
};

/// Cardinal B-spline of the given degree on knots {0, 1, ..., degree+1},
/// evaluated by the Cox-de Boor recurrence. Support is [0, degree+1).
inline double cardinal_bspline(double u, int degree) {
  const int m = degree + 1;
  if (u < 0.0 || u >= static_cast<double>(m)) return 0.0;
  // Degree-0 indicators on unit intervals, then raise the degree.
  std::vector<double> b(static_cast<std::size_t>(m), 0.0);
  const int cell = static_cast<int>(std::floor(u));
  b[static_cast<std::size_t>(cell)] = 1.0;
  for (int d = 1; d <= degree; ++d) {
    for (int j = 0; j < m - d; ++j) {
      const double left = (u - j) / d * b[static_cast<std::size_t>(j)];
      const double right =
          (j + d + 1 - u) / d * b[static_cast<std::size_t>(j + 1)];
      b[static_cast<std::size_t>(j)] = left + right;
    }
  }
  return b[0];
}

/// Values of all n_basis periodic basis functions at a position within the
/// period (basis l starts at knot (l-1) * spacing).
inline std::vector<double> periodic_bspline_basis(double position,
                                                  const SplineBasisConfig& cfg) {
  cfg.validate();
  const double h = cfg.knot_spacing();
  double pos = std::fmod(position, cfg.period);
  if (pos < 0) pos += cfg.period;
  std::vector<double> out(static_cast<std::size_t>(cfg.n_basis), 0.0);
  for (int l = 0; l < cfg.n_basis; ++l) {
    const double x = (pos - l * h) / h;
    // Sum over periodic wraps whose support can contain x.
    double value = 0.0;
    for (int k = -1; k <= (cfg.degree + 1) / cfg.n_basis + 1; ++k)
      value += cardinal_bspline(x + k * static_cast<double>(cfg.n_basis),
                                cfg.degree);
    out[static_cast<std::size_t>(l)] = value;
  }
  return out;
}

/// Cumulative variant: Bcum_l = B_1 + ... + B_l; Bcum_K is identically 1.
inline std::vector<double> periodic_bspline_basis_cumulative(
    double position, const SplineBasisConfig& cfg) {
  auto out = periodic_bspline_basis(position, cfg);
  for (std::size_t l = 1; l < out.size(); ++l) out[l] += out[l - 1];
  return out;
}

}  // namespace demandcast
