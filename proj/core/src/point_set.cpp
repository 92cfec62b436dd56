#include "usdlab/point_set.hpp"

#include <cmath>

#include "usdlab/errors.hpp"

namespace usdlab {

double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

PointSet::PointSet(const std::vector<std::vector<double>>& points)
    : dim_(points.empty() ? 0 : points.front().size()),
      provenance_(ExplicitProvenance{}) {
  if (points.empty()) throw InvalidArgument("point set must be nonempty");
  if (dim_ == 0) throw InvalidArgument("points must have dimension >= 1");
  coords_.reserve(points.size() * dim_);
  for (const auto& x : points) {
    if (x.size() != dim_)
      throw DimensionMismatch("all points must share one dimension");
    for (double c : x) coords_.push_back(wrap_angle(c));
  }
}

PointSet::PointSet(std::size_t dim, std::vector<double> flat,
                   Provenance provenance)
    : dim_(dim), coords_(std::move(flat)), provenance_(provenance) {
  if (dim_ == 0) throw InvalidArgument("points must have dimension >= 1");
  if (coords_.empty() || coords_.size() % dim_ != 0)
    throw InvalidArgument("flat coordinate array must hold m >= 1 points");
  for (double& c : coords_) c = wrap_angle(c);
}

PointSet PointSet::equispaced(std::int64_t per_dim, std::size_t dim) {
  if (per_dim < 1 || dim < 1)
    throw InvalidArgument("equispaced grid needs per_dim >= 1 and dim >= 1");
  std::int64_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) total *= per_dim;
  std::vector<double> flat(static_cast<std::size_t>(total) * dim);
  const double h = kTwoPi / static_cast<double>(per_dim);
  for (std::int64_t i = 0; i < total; ++i) {
    std::int64_t rest = i;
    for (std::size_t j = dim; j-- > 0;) {
      flat[static_cast<std::size_t>(i) * dim + j] =
          h * static_cast<double>(rest % per_dim);
      rest /= per_dim;
    }
  }
  return PointSet(dim, std::move(flat), EquispacedProvenance{per_dim});
}

PointSet PointSet::uniform(std::size_t m, std::size_t dim, std::uint64_t seed,
                           std::uint64_t draw_index) {
  if (m < 1 || dim < 1)
    throw InvalidArgument("uniform draw needs m >= 1 and dim >= 1");
  Rng rng = make_rng(seed, draw_index);
  std::vector<double> flat(m * dim);
  for (double& c : flat) c = kTwoPi * uniform01(rng);
  return PointSet(dim, std::move(flat), SeededProvenance{seed, draw_index});
}

PointSet PointSet::concatenated(const PointSet& other) const {
  if (other.dim_ != dim_)
    throw DimensionMismatch("cannot concatenate point sets of different dim");
  std::vector<double> flat = coords_;
  flat.insert(flat.end(), other.coords_.begin(), other.coords_.end());
  return PointSet(dim_, std::move(flat), ExplicitProvenance{});
}

}  // namespace usdlab
