#include "usdlab/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"

namespace usdlab {

Dictionary::Dictionary(std::vector<TrigPolynomial> elements,
                       double uniform_bound,
                       std::optional<double> riesz_constant, int grid_level)
    : elements_(std::move(elements)),
      uniform_bound_(uniform_bound),
      riesz_constant_(riesz_constant) {
  if (elements_.empty()) throw InvalidArgument("dictionary must be nonempty");
  dim_ = elements_.front().dim();
  std::map<Frequency, std::size_t> index;
  for (const auto& g : elements_) {
    if (g.dim() != dim_) throw DimensionMismatch("dictionary mixes dimensions");
    for (const auto& [k, c] : g.coefficients()) index.emplace(k, 0);
  }
  std::size_t n = 0;
  for (auto& [k, slot] : index) {
    slot = n++;
    frequencies_.push_back(k);
  }
  coefficients_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(frequencies_.size()),
                                         static_cast<Eigen::Index>(elements_.size()));
  orthonormal_ = true;
  std::vector<bool> used(frequencies_.size(), false);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& g = elements_[i];
    for (const auto& [k, c] : g.coefficients())
      coefficients_(static_cast<Eigen::Index>(index[k]), static_cast<Eigen::Index>(i)) = c;
    if (g.size() != 1 || std::abs(std::abs(g.coefficients().begin()->second) - 1.0) > 1e-15) {
      orthonormal_ = false;
    } else {
      const auto slot = index[g.coefficients().begin()->first];
      if (used[slot]) orthonormal_ = false;
      used[slot] = true;
    }
  }
  for (const auto& g : elements_) {
    double s = 0.0;
    if (g.size() <= 1) {
      // A single exponential has constant modulus.
      s = g.empty() ? 0.0 : std::abs(g.coefficients().begin()->second);
    } else {
      const int level = grid_level < 0 ? sup_grid_level(g, 6) : grid_level;
      s = sup_norm(g, level).value;
    }
    if (s > uniform_bound_ * (1.0 + 1e-12) + 1e-15)
      throw InvalidArgument("dictionary element sup norm " + std::to_string(s) +
                            " exceeds the declared uniform bound " +
                            std::to_string(uniform_bound_));
  }
}

Dictionary Dictionary::exponentials(const FrequencySet& frequencies) {
  std::vector<TrigPolynomial> elements;
  elements.reserve(frequencies.size());
  for (const auto& k : frequencies) elements.push_back(TrigPolynomial::monomial(k));
  return Dictionary(std::move(elements), 1.0, 1.0);
}

std::int64_t Dictionary::max_frequency() const noexcept {
  std::int64_t m = 0;
  for (const auto& k : frequencies_) m = std::max(m, k.max_abs());
  return m;
}

Eigen::MatrixXcd Dictionary::sample(const PointSet& points) const {
  if (points.dim() != dim_)
    throw DimensionMismatch("point set dimension does not match dictionary");
  return apply_coefficients(exponential_matrix(frequencies_, points));
}

Eigen::MatrixXcd Dictionary::sample_grid(int grid_level) const {
  if (grid_level < 0 || grid_level > 40) throw InvalidArgument("bad grid level");
  return apply_coefficients(
      exponential_grid_matrix(frequencies_, dim_, std::int64_t{1} << grid_level));
}

Eigen::MatrixXcd Dictionary::apply_coefficients(Eigen::MatrixXcd E) const {
  if (!orthonormal_) return E * coefficients_;
  // Unimodular exponentials: the coefficient matrix is a scaled selection,
  // so pick columns instead of multiplying by it.
  Eigen::MatrixXcd out(E.rows(), static_cast<Eigen::Index>(elements_.size()));
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& [k, c] = *elements_[i].coefficients().begin();
    const auto it = std::lower_bound(frequencies_.begin(), frequencies_.end(), k);
    out.col(static_cast<Eigen::Index>(i)) =
        c * E.col(static_cast<Eigen::Index>(it - frequencies_.begin()));
  }
  return out;
}

Eigen::MatrixXcd Dictionary::gram(std::span<const std::size_t> J) const {
  const auto n = static_cast<Eigen::Index>(J.size());
  Eigen::MatrixXcd C(coefficients_.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (J[static_cast<std::size_t>(j)] >= elements_.size())
      throw InvalidArgument("dictionary index out of range");
    C.col(j) = coefficients_.col(static_cast<Eigen::Index>(J[static_cast<std::size_t>(j)]));
  }
  return C.adjoint() * C;
}

TrigPolynomial Dictionary::combine(std::span<const std::size_t> J,
                                   const Eigen::VectorXcd& coeffs) const {
  if (static_cast<Eigen::Index>(J.size()) != coeffs.size())
    throw InvalidArgument("coefficient count must match the index set");
  TrigPolynomial f(dim_);
  for (std::size_t j = 0; j < J.size(); ++j) {
    if (J[j] >= elements_.size()) throw InvalidArgument("dictionary index out of range");
    for (const auto& [k, c] : elements_[J[j]].coefficients())
      f.add(k, coeffs(static_cast<Eigen::Index>(j)) * c);
  }
  return f;
}

Dictionary exponential_dictionary_1d(std::size_t N) {
  if (N < 1) throw InvalidArgument("dictionary size must be >= 1");
  const auto half = static_cast<std::int64_t>(N / 2);
  std::vector<Frequency> ks;
  for (std::int64_t k = -half; k < static_cast<std::int64_t>(N) - half; ++k)
    ks.push_back(Frequency{k});
  return Dictionary::exponentials(FrequencySet(1, std::move(ks)));
}

NikolskiiEstimate nikolskii_ratio_estimate(const Dictionary& dictionary,
                                           double q, std::size_t trials,
                                           std::uint64_t seed, int grid_level) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  NikolskiiEstimate out;
  std::vector<std::size_t> all(dictionary.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto consider = [&](const Eigen::VectorXcd& a) {
    const TrigPolynomial f = dictionary.combine(all, a);
    const double lq = lp_norm(f, q, grid_level);
    if (!(lq > 0.0)) {
      ++out.skipped;
      return;
    }
    out.H = std::max(out.H, sup_norm(f, grid_level).value / lq);
    ++out.evaluated;
  };
  consider(Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(dictionary.size())));
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, t);
    Eigen::VectorXcd a(static_cast<Eigen::Index>(dictionary.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = complex_normal(rng);
    consider(a);
  }
  return out;
}

}  // namespace usdlab
