#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "usdlab/random.hpp"

namespace usdlab {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct ExplicitProvenance {};

struct SeededProvenance {
  std::uint64_t seed = 0;
  std::uint64_t draw_index = 0;
};

struct EquispacedProvenance {
  std::int64_t per_dim = 0;
};

using Provenance =
    std::variant<ExplicitProvenance, SeededProvenance, EquispacedProvenance>;

/// Ordered list of m points of the torus [0, 2pi)^d. Coordinates are stored
/// row-major (point j occupies [j*d, (j+1)*d)) and are always reduced mod 2pi.
class PointSet {
 public:
  /// Explicit points; each inner vector is one point.
  explicit PointSet(const std::vector<std::vector<double>>& points);
  PointSet(std::size_t dim, std::vector<double> flat, Provenance provenance);

  /// Tensor grid with `per_dim` equispaced nodes 2 pi n / per_dim per axis.
  static PointSet equispaced(std::int64_t per_dim, std::size_t dim);

  /// m i.i.d. uniform points drawn from derive_seed(seed, draw_index).
  static PointSet uniform(std::size_t m, std::size_t dim, std::uint64_t seed,
                          std::uint64_t draw_index = 0);

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t j) const {
    return {coords_.data() + j * dim_, dim_};
  }
  const std::vector<double>& flat() const noexcept { return coords_; }
  const Provenance& provenance() const noexcept { return provenance_; }

  /// Appends the points of `other`; provenance becomes explicit.
  PointSet concatenated(const PointSet& other) const;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  Provenance provenance_;
};

/// Reduces an angle into [0, 2pi).
double wrap_angle(double x);

}  // namespace usdlab
