#pragma once

// Ordinary least-squares power-law fits in log2-log2 coordinates.

#include <span>
#include <utility>
#include <vector>

namespace usdlab {

struct RateFit {
  /// (log2 x, log2 y) pairs used in the fit.
  std::vector<std::pair<double, double>> points;
  double slope = 0.0;
  double intercept = 0.0;
  /// Root mean square of the fit residuals.
  double rms_residual = 0.0;
  /// 95% two-sided Student-t half-width of the slope.
  double slope_halfwidth = 0.0;
};

/// Fits log2 y = intercept + slope log2 x. Needs >= 3 points, all positive.
RateFit fit_rate(std::span<const std::pair<double, double>> points);
RateFit fit_rate(std::span<const double> x, std::span<const double> y);

/// 0.975 quantile of Student's t with `dof` degrees of freedom.
double student_t_975(std::size_t dof);

}  // namespace usdlab
