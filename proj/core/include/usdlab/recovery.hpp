#pragma once

// Sparse approximation in discrete (weighted) L_p norms: Chebyshev
// projections, the Weak Chebyshev Greedy Algorithm, the exhaustive best
// v-term search, the block-greedy level approximant, and the sampling
// recovery pipeline that ties them to a discretization certificate.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usdlab/dictionary.hpp"
#include "usdlab/discretization.hpp"
#include "usdlab/point_set.hpp"
#include "usdlab/trig.hpp"

namespace usdlab {

/// Target values and dictionary values on m nodes with probability weights
/// (uniform 1/m when `weights` is empty).
struct DiscreteInstance {
  Eigen::VectorXcd f_values;
  Eigen::MatrixXcd dict_values;
  Eigen::VectorXd weights;
  double p = 2.0;

  /// Samples f and the dictionary at xi with uniform weights: L_p(xi).
  static DiscreteInstance sample(const TrigPolynomial& f, const Dictionary& dictionary,
                                 const PointSet& xi, double p);
  /// Nodes = quadrature grid (total weight 1/2) followed by xi (total
  /// weight 1/2): the L_p(mu_xi) norm for polynomials the grid resolves.
  static DiscreteInstance mu_xi(const TrigPolynomial& f, const Dictionary& dictionary,
                                const PointSet& xi, double p, int grid_level);
  /// Uniform weights over the quadrature grid: continuous L_p.
  static DiscreteInstance continuous(const TrigPolynomial& f,
                                     const Dictionary& dictionary, double p,
                                     int grid_level);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(f_values.size()); }
  std::size_t columns() const noexcept { return static_cast<std::size_t>(dict_values.cols()); }
  double weight(Eigen::Index j) const;
  /// (sum_j w_j |r_j|^p)^{1/p}.
  double norm(const Eigen::VectorXcd& r) const;
  void validate() const;
};

struct ProjectionOptions {
  /// IRLS stops when the relative residual-norm change is <= rel_tol and
  /// the relative coefficient step is <= coef_tol.
  double rel_tol = 1e-10;
  std::size_t max_iters = 200;
  double weight_floor = 1e-12;
  bool allow_rank_deficient = false;
  double coef_tol = 1e-9;
};

struct Projection {
  Eigen::VectorXcd coefficients;
  Eigen::VectorXcd residual;
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Coefficients minimizing the weighted discrete L_p norm of f - sum c_j g_j
/// over j in J. p = 2 solves least squares; other p run damped IRLS.
/// `warm_start`, when given, seeds IRLS.
Projection chebyshev_projection(const DiscreteInstance& inst,
                                std::span<const std::size_t> J,
                                const ProjectionOptions& opts = {},
                                const Eigen::VectorXcd* warm_start = nullptr);

/// Action on g of the norming functional of r in the weighted L_p norm:
/// ||r||^{1-p} sum_j w_j |r_j|^{p-1} sign*(r_j) g_j, sign*(z) = conj(z)/|z|.
Complex norming_functional_action(const Eigen::VectorXcd& residual,
                                  const Eigen::VectorXcd& g, double p,
                                  const Eigen::VectorXd& weights = {});

struct TraceStep {
  std::size_t index = 0;
  double functional_value = 0.0;
  double residual_norm = 0.0;
};

struct SparseApproximant {
  std::vector<std::size_t> support;
  Eigen::VectorXcd coefficients;
  Eigen::VectorXcd residual;
  double residual_norm = 0.0;
  std::vector<TraceStep> trace;
  bool converged = true;
  std::string method;
};

struct WcgaOptions {
  /// Weakness parameter in (0, 1]; the maximizer always qualifies.
  double t = 1.0;
  std::size_t max_iter = 1;
  double stop_tol = 0.0;
  ProjectionOptions projection;
};

/// Weak Chebyshev Greedy Algorithm in the instance's discrete L_p norm.
SparseApproximant wcga(const DiscreteInstance& inst, const WcgaOptions& opts);

/// c ceil(V^2 ln(V v) v) with V = D K^{1/2}.
double wcga_iteration_budget(double D, double K, std::size_t v, double c = 1.0);

struct OracleOptions {
  double cap = 1e6;
  std::size_t threads = 1;
  ProjectionOptions projection{1e-10, 200, 1e-12, true, 1e-9};
};

/// Exhaustive best v-term approximation: projection onto every v-subset,
/// smallest residual wins (ties to the lexicographically first subset).
/// v = 0 gives the empty approximant with residual ||f||.
SparseApproximant best_v_term_oracle(const DiscreteInstance& inst, std::size_t v,
                                     const OracleOptions& opts = {});

// ---------------------------------------------------------------------------
// Block greedy approximant for classes with dyadic-level Wiener budgets.

/// v_j = floor(2^{n - beta (j - n)} j^{d-1}) for j = n..max_level.
std::vector<std::size_t> block_schedule(int n, double beta, std::size_t d, int max_level);

enum class TargetKind { continuous, discrete, mu_xi };

struct BlockTarget {
  TargetKind kind = TargetKind::continuous;
  std::optional<PointSet> xi;
  int grid_level = kDefaultGridLevel;
};

enum class BlockRule { largest_coefficients, wcga };

struct BlockGreedyOptions {
  BlockRule rule = BlockRule::largest_coefficients;
};

struct BlockGreedyResult {
  TrigPolynomial approximant{1};
  int n = 0;
  double beta = 0.0;
  /// schedule[i] = v_{n+i}.
  std::vector<std::size_t> schedule;
  std::size_t total_terms = 0;
  /// ||f - approximant|| in the target norm.
  double error = 0.0;
};

/// S_n (all levels below n) plus a v_j-term approximant of every level j >= n.
/// `levels[j]` is the level-j part f_j of f.
BlockGreedyResult block_greedy_av(std::span<const TrigPolynomial> levels, int n,
                                  double beta, double p, const BlockTarget& target,
                                  const BlockGreedyOptions& opts = {});

/// ||f - g|| in the target norm.
double target_norm(const TrigPolynomial& residual, double p, const BlockTarget& target);

// ---------------------------------------------------------------------------
// Recovery pipeline

enum class RecoveryMethod { wcga, oracle, block };

std::string to_string(RecoveryMethod method);

struct RecoveryOptions {
  RecoveryMethod method = RecoveryMethod::wcga;
  double t = 1.0;
  /// WCGA iterations (0 = v).
  std::size_t iterations = 0;
  int block_n = 1;
  /// <= 0 selects a/2 from `block_a`.
  double block_beta = 0.0;
  double block_a = 1.0;
  int grid_level = kDefaultGridLevel;
  /// Compute the oracle sigma_v in L_p(xi) and L_p(mu_xi) when C(N, v) <= cap.
  bool compute_oracle = true;
  double oracle_cap = 2e4;
  /// > 0: also compute a lower estimate of sigma_v in the sup norm using
  /// the best v-term approximation in L_q on the grid, q = this exponent.
  double sup_oracle_exponent = 0.0;
  std::size_t threads = 1;
};

struct RecoveryReport {
  RecoveryMethod method = RecoveryMethod::wcga;
  double p = 2.0;
  std::size_t v = 0;
  std::size_t m = 0;
  TrigPolynomial approximant{1};
  std::vector<std::size_t> support;
  std::vector<TraceStep> trace;
  std::size_t terms = 0;
  double discrete_residual = 0.0;
  /// ||f - approximant||_{L_p(Omega, mu)}: the recovery error.
  double continuous_error = 0.0;
  bool certified = false;
  double one_sided_constant = 0.0;
  std::optional<UsdCertificate> certificate;
  std::optional<double> sigma_v_discrete;
  std::optional<double> sigma_v_mu_xi;
  /// 2^{1/p} (2D + 1) sigma_v(f)_{L_p(mu_xi)}.
  std::optional<double> bound_mu_xi;
  std::optional<double> sigma_v_sup_lower;
  /// (2D + 1) sigma_v_sup_lower.
  std::optional<double> bound_sup;
};

/// Samples f at xi, runs the method in L_p(xi), and reports the recovery
/// error together with the quantities of the one-sided recovery inequality.
/// `certificate` should certify the collection of all 2v-subsets; when it
/// is absent the report is flagged uncertified.
RecoveryReport recovery_pipeline(const TrigPolynomial& f, const Dictionary& dictionary,
                                 const PointSet& xi, std::size_t v, double p,
                                 const RecoveryOptions& opts,
                                 const std::optional<UsdCertificate>& certificate);

}  // namespace usdlab
