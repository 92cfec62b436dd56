#pragma once

// Covering-number estimates in the uniform norm for finitely sampled
// function classes, and the entropy sums that drive the chaining bound
//
//   p^2 M^{max(p/2, p-1)} m^{-1/2} sum_{n=0}^{m} (n+1)^{-1/2} eps_n^{min(2,p)/2}.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usdlab/dictionary.hpp"
#include "usdlab/trig.hpp"

namespace usdlab {

/// Finite sample of a function class, each representative stored as its
/// values on a shared tensor grid. Distance is the grid maximum of |u - v|.
class SampledClass {
 public:
  using Values = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SampledClass(Values values, std::size_t dim, std::int64_t grid_per_dim);

  static SampledClass from_polynomials(std::span<const TrigPolynomial> functions,
                                       int grid_level);
  /// Representatives sum_i coeffs(i, r) g_i for each column r.
  static SampledClass from_combinations(const Dictionary& dictionary,
                                        const Eigen::MatrixXcd& coeffs,
                                        int grid_level);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t dim() const noexcept { return dim_; }
  std::int64_t grid_per_dim() const noexcept { return grid_per_dim_; }
  const Values& values() const noexcept { return values_; }

  double distance(std::size_t i, std::size_t j) const;
  double diameter() const;

 private:
  Values values_;
  std::size_t dim_;
  std::int64_t grid_per_dim_;
};

/// Random elements of the l1 ball A_1(D) = {sum a_i g_i : sum |a_i| <= 1}:
/// a random number (1..max_terms) of dictionary elements, Dirichlet moduli
/// summing to one, and uniform phases. Columns are coefficient vectors;
/// column 0 is the zero element, so a cover centred there has radius <= 1.
Eigen::MatrixXcd random_a1_coefficients(std::size_t dictionary_size,
                                        std::size_t count, std::uint64_t seed,
                                        std::size_t max_terms = 0);

/// Greedy farthest-point cover: starting from representative 0, repeatedly
/// add the representative farthest from the chosen centers (ties to the
/// lowest index) until every representative is within eps.
std::vector<std::size_t> greedy_cover(const SampledClass& S, double eps);

/// Farthest-point traversal; radius[c] is the covering radius achieved by
/// the first c + 1 centers.
struct FarthestPointTrace {
  std::vector<std::size_t> centers;
  std::vector<double> radius;
};

FarthestPointTrace farthest_point_trace(const SampledClass& S,
                                        std::size_t max_centers);

struct EntropyProfile {
  /// eps[n] estimates eps_n (2^n centers), n = 0..n_max.
  std::vector<double> eps;
  /// e[k] = eps_0 for k = 0 and eps_{2^k} for k >= 1, while 2^k <= n_max.
  std::vector<double> e;
  std::size_t representatives = 0;
  std::string method;
  std::vector<std::string> caveats;

  int n_max() const noexcept { return static_cast<int>(eps.size()) - 1; }
  /// eps_n, extended by zero past n_max once the profile has reached zero.
  double eps_at(std::size_t n) const;
  /// e_k with the same extension rule.
  double e_at(std::size_t k) const;
};

/// eps_n as the smallest radius for which greedy_cover needs at most 2^n
/// centers (read off the farthest-point trace), with a running minimum.
EntropyProfile entropy_numbers(const SampledClass& S, int n_max);

/// Same quantity for one n by bisection on eps over greedy_cover sizes.
double entropy_number_bisection(const SampledClass& S, int n, double tol = 1e-4,
                                int max_iterations = 40);

/// sum_{n=0}^{m} (n+1)^{-1/2} eps_n^theta, theta = min(2, p) / 2.
double entropy_sum(const EntropyProfile& profile, double p, std::size_t m);

/// sum_{k=0}^{[log2 m]} 2^{k/2} e_k^theta.
double dyadic_entropy_sum(const EntropyProfile& profile, double p, std::size_t m);

/// The chaining functional with unit absolute constant:
/// p^2 M^{max(p/2, p-1)} m^{-1/2} entropy_sum(profile, p, m).
double chaining_bound(const EntropyProfile& profile, double p, double M,
                      std::size_t m);

/// e_k <= 3 * 2^{2^{k0}/m} e_{k0} 2^{-2^k/m} for a class in an
/// m-dimensional space. Left side is an estimate, so false flags a bug.
bool finite_dim_decay_check(const EntropyProfile& profile, std::size_t dimension,
                            int k0, int k);

/// sum_{k >= log2 m} (2^{a k} 2^{-2^k / m})^b by direct summation.
double lem_bound_sum(double a, double b, std::size_t m);
/// 2 max(2^{ab-1}, 1) (b ln 2)^{-ab} Gamma(ab).
double lem_bound_constant(double a, double b);

}  // namespace usdlab
