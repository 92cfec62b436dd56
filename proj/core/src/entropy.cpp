#include "usdlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"

namespace usdlab {

namespace {

double squared_distance(const SampledClass::Values& v, Eigen::Index i, Eigen::Index j) {
  return (v.row(i) - v.row(j)).cwiseAbs2().maxCoeff();
}

double theta_of(double p) { return std::min(2.0, p) / 2.0; }

}  // namespace

SampledClass::SampledClass(Values values, std::size_t dim, std::int64_t grid_per_dim)
    : values_(std::move(values)), dim_(dim), grid_per_dim_(grid_per_dim) {
  if (values_.rows() == 0) throw InvalidArgument("sampled class must be nonempty");
}

SampledClass SampledClass::from_polynomials(std::span<const TrigPolynomial> functions,
                                            int grid_level) {
  if (functions.empty()) throw InvalidArgument("sampled class must be nonempty");
  const std::int64_t per_dim = std::int64_t{1} << grid_level;
  const std::size_t dim = functions.front().dim();
  Values values;
  for (std::size_t r = 0; r < functions.size(); ++r) {
    if (functions[r].dim() != dim) throw DimensionMismatch("class mixes dimensions");
    if (2 * functions[r].max_frequency() + 1 > per_dim)
      throw GridTooCoarse(per_dim, 2 * functions[r].max_frequency() + 1);
    const Eigen::VectorXcd row = evaluate_on_grid(functions[r], per_dim);
    if (r == 0) values.resize(static_cast<Eigen::Index>(functions.size()), row.size());
    values.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return SampledClass(std::move(values), dim, per_dim);
}

SampledClass SampledClass::from_combinations(const Dictionary& dictionary,
                                             const Eigen::MatrixXcd& coeffs,
                                             int grid_level) {
  if (coeffs.rows() != static_cast<Eigen::Index>(dictionary.size()))
    throw DimensionMismatch("coefficient rows must equal the dictionary size");
  const std::int64_t per_dim = std::int64_t{1} << grid_level;
  if (2 * dictionary.max_frequency() + 1 > per_dim)
    throw GridTooCoarse(per_dim, 2 * dictionary.max_frequency() + 1);
  Values values = (dictionary.sample_grid(grid_level) * coeffs).transpose();
  return SampledClass(std::move(values), dictionary.dim(), per_dim);
}

double SampledClass::distance(std::size_t i, std::size_t j) const {
  return std::sqrt(squared_distance(values_, static_cast<Eigen::Index>(i),
                                    static_cast<Eigen::Index>(j)));
}

double SampledClass::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) d = std::max(d, distance(i, j));
  return d;
}

Eigen::MatrixXcd random_a1_coefficients(std::size_t dictionary_size, std::size_t count,
                                        std::uint64_t seed, std::size_t max_terms) {
  if (dictionary_size < 1) throw InvalidArgument("dictionary must be nonempty");
  if (max_terms == 0 || max_terms > dictionary_size) max_terms = dictionary_size;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dictionary_size),
                                                static_cast<Eigen::Index>(count));
  std::exponential_distribution<double> weight(1.0);
  std::vector<std::size_t> order(dictionary_size);
  // Column 0 stays zero: the class contains 0.
  for (std::size_t r = 1; r < count; ++r) {
    Rng rng = make_rng(seed, r);
    const std::size_t terms =
        std::uniform_int_distribution<std::size_t>(1, max_terms)(rng);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < terms; ++i)
      std::swap(order[i], order[std::uniform_int_distribution<std::size_t>(
                                 i, dictionary_size - 1)(rng)]);
    std::vector<double> w(terms);
    for (double& x : w) x = weight(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < terms; ++i)
      out(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(r)) =
          std::polar(w[i] / total, kTwoPi * uniform01(rng));
  }
  return out;
}

FarthestPointTrace farthest_point_trace(const SampledClass& S, std::size_t max_centers) {
  FarthestPointTrace trace;
  const auto& v = S.values();
  const std::size_t n = S.size();
  max_centers = std::min(max_centers, n);
  if (max_centers == 0) return trace;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());  // squared
  std::vector<std::size_t> owner(n, 0);
  std::vector<double> center_gap;  // squared distances from the new center to earlier ones
  std::size_t next = 0;
  while (trace.centers.size() < max_centers) {
    const std::size_t c = next;
    const std::size_t slot = trace.centers.size();
    center_gap.assign(slot, 0.0);
    for (std::size_t j = 0; j < slot; ++j)
      center_gap[j] = squared_distance(v, static_cast<Eigen::Index>(c),
                                       static_cast<Eigen::Index>(trace.centers[j]));
    trace.centers.push_back(c);
    double best = -1.0;
    for (std::size_t x = 0; x < n; ++x) {
      // If |c - owner(x)| >= 2 |x - owner(x)|, c cannot be closer to x.
      if (slot > 0 && center_gap[owner[x]] >= 4.0 * nearest[x]) {
      } else {
        const double d = squared_distance(v, static_cast<Eigen::Index>(x),
                                          static_cast<Eigen::Index>(c));
        if (d < nearest[x]) {
          nearest[x] = d;
          owner[x] = slot;
        }
      }
      if (nearest[x] > best) {
        best = nearest[x];
        next = x;
      }
    }
    trace.radius.push_back(std::sqrt(std::max(best, 0.0)));
    if (best <= 0.0) break;
  }
  return trace;
}

std::vector<std::size_t> greedy_cover(const SampledClass& S, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("cover radius eps must be > 0");
  // The farthest-point prefix is extended one center at a time.
  const auto& v = S.values();
  const std::size_t n = S.size();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> centers;
  std::size_t next = 0;
  for (;;) {
    const std::size_t c = next;
    centers.push_back(c);
    double best = -1.0;
    for (std::size_t x = 0; x < n; ++x) {
      nearest[x] = std::min(nearest[x], squared_distance(v, static_cast<Eigen::Index>(x),
                                                         static_cast<Eigen::Index>(c)));
      if (nearest[x] > best) {
        best = nearest[x];
        next = x;
      }
    }
    // Compare radii, not squares, so eps = a trace radius reproduces the trace.
    if (std::sqrt(std::max(best, 0.0)) <= eps) break;
  }
  return centers;
}

double EntropyProfile::eps_at(std::size_t n) const {
  if (n < eps.size()) return eps[n];
  if (!eps.empty() && eps.back() == 0.0) return 0.0;
  throw ProfileTooShort("entropy profile covers n <= " + std::to_string(n_max()) +
                        " but eps_" + std::to_string(n) + " is required");
}

double EntropyProfile::e_at(std::size_t k) const {
  if (k == 0) return eps_at(0);
  if (k >= 63) return eps_at(std::numeric_limits<std::size_t>::max());
  return eps_at(std::size_t{1} << k);
}

EntropyProfile entropy_numbers(const SampledClass& S, int n_max) {
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
  EntropyProfile profile;
  profile.representatives = S.size();
  profile.method = "farthest-point greedy cover, centers restricted to the sample";
  profile.caveats = {
      "lower estimate of the entropy of the full class (finite sample)",
      "upper estimate, within a factor 2, for the sampled sub-class (greedy cover)"};
  // Only n with 2^n < |S| need centers; larger n give eps_n = 0.
  std::size_t needed = 1;
  for (int n = 0; n <= n_max && n < 62; ++n) {
    const std::size_t centers = std::size_t{1} << n;
    if (centers < S.size()) needed = centers;
  }
  const FarthestPointTrace trace = farthest_point_trace(S, needed);
  profile.eps.resize(static_cast<std::size_t>(n_max) + 1);
  double running = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= n_max; ++n) {
    double value = 0.0;
    if (n < 62) {
      const std::size_t centers = std::size_t{1} << n;
      if (centers < S.size()) {
        const std::size_t idx = std::min(centers, trace.radius.size()) - 1;
        value = trace.radius[idx];
      }
    }
    running = std::min(running, value);
    profile.eps[static_cast<std::size_t>(n)] = running;
  }
  profile.e.push_back(profile.eps[0]);
  for (std::size_t k = 1; k < 63 && (std::size_t{1} << k) <= static_cast<std::size_t>(n_max); ++k)
    profile.e.push_back(profile.eps[std::size_t{1} << k]);
  return profile;
}

double entropy_number_bisection(const SampledClass& S, int n, double tol,
                                int max_iterations) {
  if (n < 0) throw InvalidArgument("n must be >= 0");
  if (n < 62 && (std::size_t{1} << n) >= S.size()) return 0.0;
  const std::size_t budget = std::size_t{1} << n;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) hi = std::max(hi, S.distance(0, i));
  hi = hi * (1.0 + 1e-12) + 1e-300;
  for (int it = 0; it < max_iterations && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid > 0.0 && greedy_cover(S, mid).size() <= budget)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double entropy_sum(const EntropyProfile& profile, double p, std::size_t m) {
  const double theta = theta_of(p);
  double s = 0.0;
  for (std::size_t n = 0; n <= m; ++n) {
    const double e = profile.eps_at(n);
    if (e > 0.0) s += std::pow(static_cast<double>(n + 1), -0.5) * std::pow(e, theta);
  }
  return s;
}

double dyadic_entropy_sum(const EntropyProfile& profile, double p, std::size_t m) {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  const double theta = theta_of(p);
  const auto top = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(m))));
  double s = 0.0;
  for (std::size_t k = 0; k <= top; ++k) {
    const double e = profile.e_at(k);
    if (e > 0.0) s += std::pow(2.0, static_cast<double>(k) / 2.0) * std::pow(e, theta);
  }
  return s;
}

double chaining_bound(const EntropyProfile& profile, double p, double M, std::size_t m) {
  if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
  if (!(M > 0.0)) throw InvalidArgument("M must be > 0");
  if (m < 1) throw InvalidArgument("m must be >= 1");
  const double prefactor = p * p * std::pow(M, std::max(p / 2.0, p - 1.0)) /
                           std::sqrt(static_cast<double>(m));
  return prefactor * entropy_sum(profile, p, m);
}

bool finite_dim_decay_check(const EntropyProfile& profile, std::size_t dimension,
                            int k0, int k) {
  if (k <= k0 || k0 < 0) throw InvalidArgument("need 0 <= k0 < k");
  if (dimension < 1) throw InvalidArgument("dimension must be >= 1");
  const double m = static_cast<double>(dimension);
  const double lhs = profile.e_at(static_cast<std::size_t>(k));
  const double rhs = 3.0 * std::pow(2.0, std::ldexp(1.0, k0) / m) *
                     profile.e_at(static_cast<std::size_t>(k0)) *
                     std::pow(2.0, -std::ldexp(1.0, k) / m);
  return lhs <= rhs * (1.0 + 1e-12);
}

double lem_bound_sum(double a, double b, std::size_t m) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("need a, b > 0");
  if (m < 2) throw InvalidArgument("need m >= 2");
  const auto k0 = static_cast<int>(std::ceil(std::log2(static_cast<double>(m)) - 1e-12));
  double s = 0.0;
  for (int k = k0; k < 1100; ++k) {
    const double log2_term = b * (a * k - std::ldexp(1.0, k) / static_cast<double>(m));
    if (log2_term < -1100.0) break;
    s += std::exp2(log2_term);
  }
  return s;
}

double lem_bound_constant(double a, double b) {
  const double ab = a * b;
  return 2.0 * std::max(std::exp2(ab - 1.0), 1.0) * std::pow(b * std::log(2.0), -ab) *
         std::tgamma(ab);
}

}  // namespace usdlab
