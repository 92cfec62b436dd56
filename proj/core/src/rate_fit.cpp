#include "usdlab/rate_fit.hpp"

#include <array>
#include <cmath>

#include "usdlab/errors.hpp"

namespace usdlab {

double student_t_975(std::size_t dof) {
  static constexpr std::array<double, 30> table = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof == 0) throw InvalidArgument("t quantile needs at least one degree of freedom");
  if (dof <= table.size()) return table[dof - 1];
  // Cornish-Fisher expansion around the normal quantile.
  const double z = 1.959963984540054;
  const double n = static_cast<double>(dof);
  return z + (z * z * z + z) / (4.0 * n) +
         (5.0 * std::pow(z, 5) + 16.0 * z * z * z + 3.0 * z) / (96.0 * n * n);
}

RateFit fit_rate(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw InvalidArgument("rate fit needs at least 3 points");
  RateFit fit;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw InvalidArgument("rate fit needs positive finite values");
    fit.points.emplace_back(std::log2(x), std::log2(y));
  }
  const double n = static_cast<double>(fit.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [u, w] : fit.points) {
    mx += u;
    my += w;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [u, w] : fit.points) {
    sxx += (u - mx) * (u - mx);
    sxy += (u - mx) * (w - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("rate fit needs at least two distinct x values");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [u, w] : fit.points) {
    const double e = w - (fit.intercept + fit.slope * u);
    sse += e * e;
  }
  fit.rms_residual = std::sqrt(sse / n);
  const std::size_t dof = fit.points.size() - 2;
  fit.slope_halfwidth = student_t_975(dof) * std::sqrt(sse / static_cast<double>(dof) / sxx);
  return fit;
}

RateFit fit_rate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("x and y differ in length");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) pts.emplace_back(x[i], y[i]);
  return fit_rate(pts);
}

}  // namespace usdlab
