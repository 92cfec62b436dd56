#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "usdlab/point_set.hpp"
#include "usdlab/trig.hpp"

namespace usdlab {

/// Nikol'skii pair: ||f||_inf <= H ||f||_q on the span.
struct NikolskiiEntry {
  double q = 2.0;
  double H = 1.0;
};

/// Ordered system g_1, ..., g_N of trigonometric polynomials.
class Dictionary {
 public:
  /// Checks uniform_bound >= the grid sup-norm estimate of every element.
  /// grid_level < 0 picks the smallest admissible level per element.
  Dictionary(std::vector<TrigPolynomial> elements, double uniform_bound,
             std::optional<double> riesz_constant = std::nullopt,
             int grid_level = -1);

  /// {exp(i<k,x>) : k in frequencies}: orthonormal, bound 1, K = 1.
  static Dictionary exponentials(const FrequencySet& frequencies);

  std::size_t size() const noexcept { return elements_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const TrigPolynomial& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<TrigPolynomial>& elements() const noexcept { return elements_; }

  double uniform_bound() const noexcept { return uniform_bound_; }
  /// Constant K with sum |a_j|^2 <= K ||sum a_j g_j||_2^2, when known.
  std::optional<double> riesz_constant() const noexcept { return riesz_constant_; }
  const std::vector<NikolskiiEntry>& nikolskii() const noexcept { return nikolskii_; }
  void record_nikolskii(double q, double H) { nikolskii_.push_back({q, H}); }

  /// True when every element is a distinct unimodular exponential.
  bool orthonormal_exponentials() const noexcept { return orthonormal_; }

  /// Union of the element supports (lexicographic).
  const std::vector<Frequency>& frequencies() const noexcept { return frequencies_; }
  /// |frequencies()| x N coefficient matrix.
  const Eigen::MatrixXcd& coefficient_matrix() const noexcept { return coefficients_; }
  std::int64_t max_frequency() const noexcept;

  /// m x N matrix of g_i(x_j).
  Eigen::MatrixXcd sample(const PointSet& points) const;
  /// Values on the tensor grid with 2^grid_level nodes per axis.
  Eigen::MatrixXcd sample_grid(int grid_level) const;

  /// Continuous Gram matrix G_{ij} = <g_j, g_i> over the subset J (Parseval).
  Eigen::MatrixXcd gram(std::span<const std::size_t> J) const;

  /// sum_j coeffs[j] g_{J[j]}.
  TrigPolynomial combine(std::span<const std::size_t> J,
                         const Eigen::VectorXcd& coeffs) const;

 private:
  Eigen::MatrixXcd apply_coefficients(Eigen::MatrixXcd E) const;

  std::size_t dim_ = 1;
  std::vector<TrigPolynomial> elements_;
  double uniform_bound_ = 1.0;
  std::optional<double> riesz_constant_;
  std::vector<NikolskiiEntry> nikolskii_;
  bool orthonormal_ = false;
  std::vector<Frequency> frequencies_;
  Eigen::MatrixXcd coefficients_;
};

/// One-dimensional exponential dictionary with N consecutive frequencies
/// -floor(N/2), ..., N - 1 - floor(N/2).
Dictionary exponential_dictionary_1d(std::size_t N);

struct NikolskiiEstimate {
  /// Largest observed sup_norm / L_q ratio: a lower estimate of H.
  double H = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// Max of sup_norm(f) / ||f||_q over `trials` random complex-Gaussian
/// combinations of the dictionary and the all-ones combination.
NikolskiiEstimate nikolskii_ratio_estimate(const Dictionary& dictionary,
                                           double q, std::size_t trials,
                                           std::uint64_t seed, int grid_level);

}  // namespace usdlab
