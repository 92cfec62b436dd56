#pragma once

// Discrete L_p norms on point sets, discretization errors, and certification
// and randomized search of universal sampling discretization (usd) sets:
//
//   (1 - eps) ||f||_p^p <= m^{-1} sum_j |f(xi^j)|^p <= (1 + eps) ||f||_p^p
//
// for every f in every subspace of a collection (eps = 1/2 by default).

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usdlab/dictionary.hpp"
#include "usdlab/point_set.hpp"
#include "usdlab/trig.hpp"

namespace usdlab {

/// (m^{-1} sum |v_j|^p)^{1/p}.
double discrete_lp_norm(std::span<const Complex> values, double p);
double discrete_lp_norm(const Eigen::VectorXcd& values, double p);

/// Norm in L_p of the measure mu/2 + (2m)^{-1} sum_j delta_{xi^j}.
double mu_xi_norm(const TrigPolynomial& f, const PointSet& xi, double p,
                  int grid_level);

/// Spans V_J = span{g_j : j in J} with |J| = v, either listed explicitly or
/// all v-subsets of the dictionary.
struct SubspaceCollection {
  Dictionary dictionary;
  std::size_t v = 1;
  bool all_subsets = true;
  std::vector<std::vector<std::size_t>> subsets;

  static SubspaceCollection all(Dictionary dictionary, std::size_t v);
  static SubspaceCollection listed(Dictionary dictionary,
                                   std::vector<std::vector<std::size_t>> subsets);

  /// Number of subspaces (C(N, v) for the "all" rule).
  double count() const;
  /// Calls fn(index, J) for each subspace in lexicographic order.
  void for_each(const std::function<void(std::size_t, const std::vector<std::size_t>&)>& fn) const;
  std::vector<std::vector<std::size_t>> materialize(double cap) const;
};

enum class VerificationMethod { eigen_exact, multistart };

std::string to_string(VerificationMethod method);

struct RatioOptions {
  std::size_t starts = 64;
  double gradient_tol = 1e-9;
  std::size_t max_iters = 500;
  /// Quadrature level for continuous L_p norms when p != 2; < 0 selects a
  /// level that integrates |f|^p exactly for even integer p.
  int grid_level = -1;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Two-sided tolerance; the certificate window is [1 - eps, 1 + eps].
  double epsilon = 0.5;
  double subset_cap = 1e6;
};

/// Extremes of m^{-1} sum |f(xi^j)|^p / ||f||_p^p over a span.
struct RatioBounds {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  VerificationMethod method = VerificationMethod::eigen_exact;
  bool heuristic = false;
  bool converged = true;
  std::size_t starts = 0;
  /// Coefficients of the extremal elements, normalized to ||f||_p = 1.
  Eigen::VectorXcd min_vector;
  Eigen::VectorXcd max_vector;
};

/// p = 2: exact generalized eigenvalues of (m^{-1} A^* A, Gram). Otherwise
/// multistart projected gradient on the unit sphere, warm-started from the
/// p = 2 extremal vectors; the result is flagged heuristic.
RatioBounds subspace_ratio_bounds(std::span<const std::size_t> J,
                                  const Dictionary& dictionary,
                                  const PointSet& xi, double p,
                                  const RatioOptions& opts = {});

struct SubsetRatio {
  std::vector<std::size_t> subset;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  bool converged = true;
};

struct UsdCertificate {
  double p = 2.0;
  double epsilon = 0.5;
  VerificationMethod method = VerificationMethod::eigen_exact;
  /// Multistart starts per subset: random starts plus the two p = 2 extremal
  /// vectors (0 for the exact p = 2 method).
  std::size_t starts = 0;
  double gradient_tol = 0.0;
  std::size_t max_iters = 0;
  std::size_t points = 0;
  std::vector<SubsetRatio> entries;
  bool pass = false;
  bool heuristic = false;
  bool all_converged = true;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// One-sided constant D = max over subsets of min_ratio^{-1/p}.
  double one_sided_constant = 0.0;
  /// max over subsets of max(1 - min_ratio, max_ratio - 1).
  double worst_deviation = 0.0;
};

UsdCertificate check_usd(const PointSet& xi, const SubspaceCollection& collection,
                         double p, const RatioOptions& opts = {});

struct UsdSearchResult {
  bool found = false;
  /// Passing set, or the attempt with the smallest worst deviation.
  std::optional<PointSet> points;
  UsdCertificate certificate;
  std::size_t draw_index = 0;
  std::size_t trials_run = 0;
  /// v (log 2v + log log 2N)^2 (log N)^2 with unit constant, for comparison.
  double theory_order = 0.0;
};

/// Draws m i.i.d. uniform points per trial (seeded by (seed, trial)) until
/// one set certifies. Failure is reported in the result, not thrown.
UsdSearchResult find_usd_points(const SubspaceCollection& collection, double p,
                                std::size_t m, std::size_t max_trials,
                                std::uint64_t seed, const RatioOptions& opts = {});

/// v (log2 2v + log2 log2 2N)^2 (log2 N)^2.
double usd_theory_order(std::size_t v, std::size_t N);

/// max over f in W of | ||f||_p^p - m^{-1} sum_j |f(xi^j)|^p |.
double discretization_error_finite(std::span<const TrigPolynomial> W,
                                   const PointSet& xi, double p, int grid_level);

/// discretization_error_finite for draws t = 0..mc_trials-1 of m uniform
/// points, draw t seeded by (seed, t).
std::vector<double> discretization_error_trials(std::span<const TrigPolynomial> W,
                                                double p, std::size_t m,
                                                std::size_t mc_trials,
                                                std::uint64_t seed, int grid_level,
                                                std::size_t threads = 1);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t trials = 0;
};

/// Monte-Carlo mean and standard error of discretization_error_finite over
/// independent uniform draws of m points.
MonteCarloEstimate expected_sup_estimate(std::span<const TrigPolynomial> W,
                                         double p, std::size_t m,
                                         std::size_t mc_trials,
                                         std::uint64_t seed, int grid_level,
                                         std::size_t threads = 1);

}  // namespace usdlab
