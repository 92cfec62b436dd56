#pragma once

// Frequency sets, trigonometric polynomials on the torus [0, 2pi)^d with the
// normalized Lebesgue measure, their norms, and generators for the smoothness
// classes used in the experiments.

#include <Eigen/Dense>

#include <compare>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "usdlab/point_set.hpp"

namespace usdlab {

using Complex = std::complex<double>;

inline constexpr double kDefaultSizeCap = 1e7;
inline constexpr int kDefaultGridLevel = 10;
/// Largest tensor grid (total nodes) any quadrature routine will build.
inline constexpr std::int64_t kMaxGridNodes = std::int64_t{1} << 26;

/// Integer frequency vector k in Z^d.
class Frequency {
 public:
  Frequency() = default;
  explicit Frequency(std::vector<std::int64_t> k) : k_(std::move(k)) {}
  Frequency(std::initializer_list<std::int64_t> k) : k_(k) {}

  std::size_t dim() const noexcept { return k_.size(); }
  std::int64_t operator[](std::size_t j) const { return k_[j]; }
  const std::vector<std::int64_t>& components() const noexcept { return k_; }
  /// max_j |k_j|
  std::int64_t max_abs() const noexcept;

  auto operator<=>(const Frequency&) const = default;
  bool operator==(const Frequency&) const = default;

 private:
  std::vector<std::int64_t> k_;
};

/// Finite, duplicate-free, lexicographically sorted subset of Z^d.
class FrequencySet {
 public:
  explicit FrequencySet(std::size_t dim) : dim_(dim) {}
  /// Sorts the indices; throws on duplicates or dimension mismatch.
  FrequencySet(std::size_t dim, std::vector<Frequency> indices);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const Frequency& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<Frequency>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  bool contains(const Frequency& k) const;
  std::int64_t max_abs() const noexcept;

  bool operator==(const FrequencySet&) const = default;

 private:
  std::size_t dim_;
  std::vector<Frequency> indices_;
};

/// Number of k in Z^d with prod_j max(|k_j|, 1) <= N, without enumerating.
std::uint64_t hyperbolic_cross_size(std::int64_t N, std::size_t d);

/// Hyperbolic cross {k : prod_j max(|k_j|,1) <= N}, lexicographic order.
/// Throws CapExceeded when the predicted size exceeds `cap`.
FrequencySet hyperbolic_cross(std::int64_t N, std::size_t d,
                              double cap = kDefaultSizeCap);

/// Dyadic block rho(s): product of annuli floor(2^{s_j-1}) <= |k_j| < 2^{s_j}.
FrequencySet dyadic_block(std::span<const int> s, double cap = kDefaultSizeCap);

/// The s with k in rho(s).
std::vector<int> dyadic_index(const Frequency& k);

/// ||s||_1 for the block containing k.
int dyadic_level(const Frequency& k);

/// Union of rho(s) over ||s||_1 = level.
FrequencySet dyadic_level_set(int level, std::size_t d,
                              double cap = kDefaultSizeCap);

/// Finite sum of c_k exp(i <k, x>), coefficients held in lexicographic order.
class TrigPolynomial {
 public:
  using CoefficientMap = std::map<Frequency, Complex>;

  explicit TrigPolynomial(std::size_t dim) : dim_(dim) {}

  static TrigPolynomial constant(std::size_t dim, Complex c);
  static TrigPolynomial monomial(const Frequency& k, Complex c = 1.0);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  bool empty() const noexcept { return coeffs_.empty(); }

  Complex coefficient(const Frequency& k) const;
  void set(const Frequency& k, Complex c);
  void add(const Frequency& k, Complex c);
  const CoefficientMap& coefficients() const noexcept { return coeffs_; }

  FrequencySet support() const;
  /// max over the support of max_j |k_j| (0 for an empty polynomial).
  std::int64_t max_frequency() const noexcept;
  /// l2 norm of the coefficient vector.
  double coefficient_l2() const;
  /// Wiener norm: sum of coefficient moduli.
  double a_norm() const;

  TrigPolynomial& operator+=(const TrigPolynomial& other);
  TrigPolynomial& operator-=(const TrigPolynomial& other);
  TrigPolynomial& operator*=(Complex s);

  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) {
    return a += b;
  }
  friend TrigPolynomial operator-(TrigPolynomial a, const TrigPolynomial& b) {
    return a -= b;
  }
  friend TrigPolynomial operator*(Complex s, TrigPolynomial a) {
    return a *= s;
  }

 private:
  std::size_t dim_;
  CoefficientMap coeffs_;
};

/// Values of f at each point, summed in lexicographic frequency order.
std::vector<Complex> evaluate(const TrigPolynomial& f, const PointSet& points);

/// m x |frequencies| matrix of exp(i <k, x_j>).
Eigen::MatrixXcd exponential_matrix(std::span<const Frequency> frequencies,
                                    const PointSet& points);

/// Values of f on the tensor grid with `per_dim` nodes per axis, using exact
/// roots-of-unity tables. Node order matches PointSet::equispaced.
Eigen::VectorXcd evaluate_on_grid(const TrigPolynomial& f,
                                  std::int64_t per_dim);

/// Grid matrix of the exponentials: rows are grid nodes.
Eigen::MatrixXcd exponential_grid_matrix(std::span<const Frequency> frequencies,
                                         std::size_t dim, std::int64_t per_dim);

/// Smallest grid level whose 2^level nodes reach `per_dim_required`.
int grid_level_for(std::int64_t per_dim_required);

/// Grid level accepted by lp_norm for f, never below `minimum`.
int lp_grid_level(const TrigPolynomial& f, int minimum = kDefaultGridLevel);
/// Grid level accepted by sup_norm for f, never below `minimum`.
int sup_grid_level(const TrigPolynomial& f, int minimum = kDefaultGridLevel);

/// ||f||_p^p. p = 2 uses Parseval; otherwise tensor-grid rectangle
/// quadrature with 2^grid_level nodes per axis. Throws GridTooCoarse when
/// 2^grid_level < 2 max|k_j| + 1.
double lp_norm_pow(const TrigPolynomial& f, double p, int grid_level);

/// ||f||_p (p-th root of lp_norm_pow).
double lp_norm(const TrigPolynomial& f, double p, int grid_level);

/// Grid maximum of |f|: a lower estimate of the true sup norm.
struct SupNormEstimate {
  double value = 0.0;
  std::int64_t grid_per_dim = 0;
  /// Nodes per axis divided by the largest frequency magnitude (or the node
  /// count itself for constants).
  double oversampling = 0.0;
};

/// Requires 2^grid_level >= 8 max|k_j|; throws GridTooCoarse otherwise.
SupNormEstimate sup_norm(const TrigPolynomial& f, int grid_level);

/// Fourier coefficient of the one-dimensional Bernoulli kernel
/// F_r(x) = 1 + 2 sum_k k^{-r} cos(kx - r pi / 2).
Complex bernoulli_kernel_coefficient(double r, std::int64_t k);

struct BernoulliKernel {
  TrigPolynomial coefficients{1};
  std::int64_t truncation = 0;
  /// Sup-norm bound 2 K^{1-r} / (r - 1) of the dropped tail, when r > 1.
  std::optional<double> tail_bound;
};

/// F_r truncated to |k| <= K (d = 1). Conjugate-symmetric, so F_r is real.
BernoulliKernel bernoulli_kernel_coefficients(double r, std::int64_t K);

/// f = phi * F_r with the tensor-product kernel: f^(k) = phi^(k) prod_j F_r^(k_j).
/// Throws NormViolation when ||phi||_q > 1 + 1e-9.
TrigPolynomial wrq_element(const TrigPolynomial& phi, double r, double q,
                           int grid_level);

/// Per-level Wiener-norm budget 2^{-a j} max(j,1)^{(d-1) b}.
struct SmoothnessBudget {
  double a = 1.0;
  double b = 0.0;
  std::size_t d = 1;
  int max_level = 0;

  double level_budget(int j) const;
};

/// How many frequencies of each dyadic level a generated element uses.
struct SupportRule {
  /// Terms per level; 0 means the whole level.
  std::size_t max_terms_per_level = 0;
  /// Optional per-level overrides (index = level). An override of 0 empties
  /// the level, which is then skipped.
  std::vector<std::size_t> counts;

  std::size_t count_for(int level, std::size_t level_size) const;
};

/// Element of the class with dyadic-level Wiener budgets, plus its
/// level decomposition.
struct WabElement {
  TrigPolynomial f{1};
  /// levels[j] = f_j, the part of f supported on the dyadic level j.
  std::vector<TrigPolynomial> levels;
  std::vector<int> skipped_levels;
};

/// Random element whose level Wiener norms saturate the budget: random
/// support inside each level, Dirichlet-distributed moduli, uniform phases.
WabElement wab_element(const SmoothnessBudget& budget, const SupportRule& rule,
                       std::uint64_t seed);

/// Splits f into its dyadic levels (index = level, empty levels kept).
std::vector<TrigPolynomial> level_decomposition(const TrigPolynomial& f);

/// Mixed l-th difference in the coordinates `e` with steps t, applied on the
/// coefficients: each factor multiplies f^(k) by (exp(i k_j t_j) - 1)^l.
TrigPolynomial mixed_difference(const TrigPolynomial& f, int l,
                                std::span<const double> t,
                                std::span<const std::size_t> e);

/// ||Delta_t^l(e) f||_p / prod_{j in e} |t_j|^r.
double mixed_difference_seminorm(const TrigPolynomial& f, double r, int l,
                                 std::span<const double> t,
                                 std::span<const std::size_t> e, double p,
                                 int grid_level);

}  // namespace usdlab
