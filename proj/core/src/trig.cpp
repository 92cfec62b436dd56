#include "usdlab/trig.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"

namespace usdlab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

std::int64_t grid_nodes(std::int64_t per_dim, std::size_t dim) {
  std::int64_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (total > kMaxGridNodes / std::max<std::int64_t>(per_dim, 1))
      throw CapExceeded("tensor grid",
                        std::pow(static_cast<double>(per_dim),
                                 static_cast<double>(dim)),
                        static_cast<double>(kMaxGridNodes));
    total *= per_dim;
  }
  return total;
}

std::int64_t pow2(int level) {
  if (level < 0 || level > 40)
    throw InvalidArgument("grid level must lie in [0, 40]");
  return std::int64_t{1} << level;
}

std::int64_t mod_positive(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    throw InvalidArgument("norm exponent p must be a finite real >= 1");
}

// Per-dimension tables of exp(i k x) over the distinct k_j values that occur
// in `frequencies`; `slot[f][j]` indexes table j for frequency f.
struct ExponentTables {
  std::vector<std::vector<std::int64_t>> values;
  std::vector<std::vector<std::size_t>> slot;

  ExponentTables(std::span<const Frequency> frequencies, std::size_t dim)
      : values(dim), slot(frequencies.size(), std::vector<std::size_t>(dim)) {
    for (std::size_t j = 0; j < dim; ++j) {
      std::set<std::int64_t> distinct;
      for (const auto& k : frequencies) distinct.insert(k[j]);
      values[j].assign(distinct.begin(), distinct.end());
    }
    for (std::size_t f = 0; f < frequencies.size(); ++f)
      for (std::size_t j = 0; j < dim; ++j)
        slot[f][j] = static_cast<std::size_t>(
            std::lower_bound(values[j].begin(), values[j].end(),
                             frequencies[f][j]) -
            values[j].begin());
  }

  void fill(std::span<const double> x,
            std::vector<std::vector<Complex>>& table) const {
    table.resize(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) {
      table[j].resize(values[j].size());
      for (std::size_t s = 0; s < values[j].size(); ++s)
        table[j][s] = std::polar(1.0, static_cast<double>(values[j][s]) * x[j]);
    }
  }
};

void check_frequency_dims(std::span<const Frequency> frequencies,
                          std::size_t dim) {
  for (const auto& k : frequencies)
    if (k.dim() != dim)
      throw DimensionMismatch("frequency dimension " + std::to_string(k.dim()) +
                              " does not match point dimension " +
                              std::to_string(dim));
}

std::vector<std::int64_t> annulus(int s) {
  if (s < 0) throw InvalidArgument("dyadic index components must be >= 0");
  if (s > 62) throw InvalidArgument("dyadic index component too large");
  if (s == 0) return {0};
  const std::int64_t lo = std::int64_t{1} << (s - 1);
  const std::int64_t hi = (std::int64_t{1} << s) - 1;
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(2 * (hi - lo + 1)));
  for (std::int64_t k = -hi; k <= -lo; ++k) out.push_back(k);
  for (std::int64_t k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

void append_product(const std::vector<std::vector<std::int64_t>>& axes,
                    std::vector<Frequency>& out) {
  std::vector<std::int64_t> k(axes.size());
  std::vector<std::size_t> pos(axes.size(), 0);
  if (axes.empty()) return;
  for (;;) {
    for (std::size_t j = 0; j < axes.size(); ++j) k[j] = axes[j][pos[j]];
    out.emplace_back(k);
    std::size_t j = axes.size();
    while (j > 0) {
      --j;
      if (++pos[j] < axes[j].size()) break;
      pos[j] = 0;
      if (j == 0) return;
    }
  }
}

double product_size(const std::vector<std::vector<std::int64_t>>& axes) {
  double n = 1.0;
  for (const auto& a : axes) n *= static_cast<double>(a.size());
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------
// Frequencies

std::int64_t Frequency::max_abs() const noexcept {
  std::int64_t m = 0;
  for (auto c : k_) m = std::max(m, c < 0 ? -c : c);
  return m;
}

FrequencySet::FrequencySet(std::size_t dim, std::vector<Frequency> indices)
    : dim_(dim), indices_(std::move(indices)) {
  if (dim_ == 0) throw InvalidArgument("frequency dimension must be >= 1");
  for (const auto& k : indices_)
    if (k.dim() != dim_)
      throw DimensionMismatch("frequency set mixes dimensions");
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw InvalidArgument("frequency set contains duplicate indices");
}

bool FrequencySet::contains(const Frequency& k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

std::int64_t FrequencySet::max_abs() const noexcept {
  std::int64_t m = 0;
  for (const auto& k : indices_) m = std::max(m, k.max_abs());
  return m;
}

std::uint64_t hyperbolic_cross_size(std::int64_t N, std::size_t d) {
  if (N < 1 || d < 1)
    throw InvalidArgument("hyperbolic cross needs N >= 1 and d >= 1");
  std::map<std::pair<std::int64_t, std::size_t>, std::uint64_t> memo;
  auto count = [&](auto&& self, std::int64_t budget,
                   std::size_t dims) -> std::uint64_t {
    if (dims == 0) return 1;
    if (dims == 1) return static_cast<std::uint64_t>(2 * budget + 1);
    auto key = std::make_pair(budget, dims);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::uint64_t total = 3 * self(self, budget, dims - 1);
    for (std::int64_t k = 2; k <= budget; ++k)
      total += 2 * self(self, budget / k, dims - 1);
    memo[key] = total;
    return total;
  };
  return count(count, N, d);
}

FrequencySet hyperbolic_cross(std::int64_t N, std::size_t d, double cap) {
  const auto predicted = hyperbolic_cross_size(N, d);
  if (static_cast<double>(predicted) > cap)
    throw CapExceeded("hyperbolic cross", static_cast<double>(predicted), cap);
  std::vector<Frequency> out;
  out.reserve(predicted);
  std::vector<std::int64_t> k(d);
  auto rec = [&](auto&& self, std::size_t j, std::int64_t budget) -> void {
    if (j == d) {
      out.emplace_back(k);
      return;
    }
    for (std::int64_t c = -budget; c <= budget; ++c) {
      k[j] = c;
      self(self, j + 1, budget / std::max<std::int64_t>(c < 0 ? -c : c, 1));
    }
  };
  rec(rec, 0, N);
  return FrequencySet(d, std::move(out));
}

FrequencySet dyadic_block(std::span<const int> s, double cap) {
  if (s.empty()) throw InvalidArgument("dyadic index must have length >= 1");
  std::vector<std::vector<std::int64_t>> axes;
  for (int sj : s) {
    if (sj < 0) throw InvalidArgument("dyadic index components must be >= 0");
    if (sj > 40) throw CapExceeded("dyadic block", std::ldexp(1.0, sj), cap);
    axes.push_back(annulus(sj));
  }
  if (product_size(axes) > cap)
    throw CapExceeded("dyadic block", product_size(axes), cap);
  std::vector<Frequency> out;
  append_product(axes, out);
  return FrequencySet(s.size(), std::move(out));
}

std::vector<int> dyadic_index(const Frequency& k) {
  std::vector<int> s(k.dim());
  for (std::size_t j = 0; j < k.dim(); ++j) {
    std::uint64_t a = static_cast<std::uint64_t>(k[j] < 0 ? -k[j] : k[j]);
    int bits = 0;
    while (a > 0) {
      ++bits;
      a >>= 1;
    }
    s[j] = bits;
  }
  return s;
}

int dyadic_level(const Frequency& k) {
  const auto s = dyadic_index(k);
  return std::accumulate(s.begin(), s.end(), 0);
}

FrequencySet dyadic_level_set(int level, std::size_t d, double cap) {
  if (level < 0 || d < 1)
    throw InvalidArgument("dyadic level set needs level >= 0 and d >= 1");
  std::vector<Frequency> out;
  std::vector<int> s(d, 0);
  double total = 0.0;
  // Enumerate compositions of `level` into d nonnegative parts.
  auto rec = [&](auto&& self, std::size_t j, int remaining) -> void {
    if (j + 1 == d) {
      s[j] = remaining;
      std::vector<std::vector<std::int64_t>> axes;
      for (int sj : s) {
        if (sj > 40) throw CapExceeded("dyadic level set", std::ldexp(1.0, sj), cap);
        axes.push_back(annulus(sj));
      }
      total += product_size(axes);
      if (total > cap) throw CapExceeded("dyadic level set", total, cap);
      append_product(axes, out);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      s[j] = v;
      self(self, j + 1, remaining - v);
    }
  };
  rec(rec, 0, level);
  return FrequencySet(d, std::move(out));
}

// ---------------------------------------------------------------------------
// Polynomials

TrigPolynomial TrigPolynomial::constant(std::size_t dim, Complex c) {
  TrigPolynomial f(dim);
  f.set(Frequency(std::vector<std::int64_t>(dim, 0)), c);
  return f;
}

TrigPolynomial TrigPolynomial::monomial(const Frequency& k, Complex c) {
  TrigPolynomial f(k.dim());
  f.set(k, c);
  return f;
}

Complex TrigPolynomial::coefficient(const Frequency& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? Complex{} : it->second;
}

void TrigPolynomial::set(const Frequency& k, Complex c) {
  if (k.dim() != dim_)
    throw DimensionMismatch("frequency dimension does not match polynomial");
  coeffs_[k] = c;
}

void TrigPolynomial::add(const Frequency& k, Complex c) {
  if (k.dim() != dim_)
    throw DimensionMismatch("frequency dimension does not match polynomial");
  coeffs_[k] += c;
}

FrequencySet TrigPolynomial::support() const {
  std::vector<Frequency> ks;
  ks.reserve(coeffs_.size());
  for (const auto& [k, c] : coeffs_) ks.push_back(k);
  return FrequencySet(dim_, std::move(ks));
}

std::int64_t TrigPolynomial::max_frequency() const noexcept {
  std::int64_t m = 0;
  for (const auto& [k, c] : coeffs_) m = std::max(m, k.max_abs());
  return m;
}

double TrigPolynomial::coefficient_l2() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

double TrigPolynomial::a_norm() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::abs(c);
  return s;
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& other) {
  if (other.dim_ != dim_) throw DimensionMismatch("polynomial dimensions differ");
  for (const auto& [k, c] : other.coeffs_) coeffs_[k] += c;
  return *this;
}

TrigPolynomial& TrigPolynomial::operator-=(const TrigPolynomial& other) {
  if (other.dim_ != dim_) throw DimensionMismatch("polynomial dimensions differ");
  for (const auto& [k, c] : other.coeffs_) coeffs_[k] -= c;
  return *this;
}

TrigPolynomial& TrigPolynomial::operator*=(Complex s) {
  for (auto& [k, c] : coeffs_) c *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<Complex> evaluate(const TrigPolynomial& f, const PointSet& points) {
  if (f.dim() != points.dim())
    throw DimensionMismatch("polynomial and point set dimensions differ");
  std::vector<Frequency> ks;
  std::vector<Complex> cs;
  for (const auto& [k, c] : f.coefficients()) {
    ks.push_back(k);
    cs.push_back(c);
  }
  const ExponentTables tables(ks, f.dim());
  std::vector<std::vector<Complex>> table;
  std::vector<Complex> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    tables.fill(points.point(i), table);
    Complex sum{};
    for (std::size_t n = 0; n < ks.size(); ++n) {
      Complex term = cs[n];
      for (std::size_t j = 0; j < f.dim(); ++j) term *= table[j][tables.slot[n][j]];
      sum += term;
    }
    out[i] = sum;
  }
  return out;
}

Eigen::MatrixXcd exponential_matrix(std::span<const Frequency> frequencies,
                                    const PointSet& points) {
  check_frequency_dims(frequencies, points.dim());
  const ExponentTables tables(frequencies, points.dim());
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(points.size()),
                       static_cast<Eigen::Index>(frequencies.size()));
  std::vector<std::vector<Complex>> table;
  for (std::size_t i = 0; i < points.size(); ++i) {
    tables.fill(points.point(i), table);
    for (std::size_t n = 0; n < frequencies.size(); ++n) {
      Complex e = 1.0;
      for (std::size_t j = 0; j < points.dim(); ++j) e *= table[j][tables.slot[n][j]];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) = e;
    }
  }
  return out;
}

Eigen::MatrixXcd exponential_grid_matrix(std::span<const Frequency> frequencies,
                                         std::size_t dim, std::int64_t per_dim) {
  check_frequency_dims(frequencies, dim);
  const std::int64_t nodes = grid_nodes(per_dim, dim);
  std::vector<Complex> roots(static_cast<std::size_t>(per_dim));
  for (std::int64_t n = 0; n < per_dim; ++n)
    roots[static_cast<std::size_t>(n)] =
        std::polar(1.0, kTwoPi * static_cast<double>(n) / static_cast<double>(per_dim));
  std::vector<std::vector<std::int64_t>> residue(frequencies.size(),
                                                 std::vector<std::int64_t>(dim));
  for (std::size_t f = 0; f < frequencies.size(); ++f)
    for (std::size_t j = 0; j < dim; ++j)
      residue[f][j] = mod_positive(frequencies[f][j], per_dim);
  Eigen::MatrixXcd out(nodes, static_cast<Eigen::Index>(frequencies.size()));
  std::vector<std::int64_t> digit(dim, 0);
  for (std::int64_t i = 0; i < nodes; ++i) {
    std::int64_t rest = i;
    for (std::size_t j = dim; j-- > 0;) {
      digit[j] = rest % per_dim;
      rest /= per_dim;
    }
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
      std::int64_t idx = 0;
      for (std::size_t j = 0; j < dim; ++j)
        idx = (idx + residue[f][j] * digit[j]) % per_dim;
      out(i, static_cast<Eigen::Index>(f)) = roots[static_cast<std::size_t>(idx)];
    }
  }
  return out;
}

Eigen::VectorXcd evaluate_on_grid(const TrigPolynomial& f, std::int64_t per_dim) {
  std::vector<Frequency> ks;
  Eigen::VectorXcd cs(static_cast<Eigen::Index>(f.size()));
  Eigen::Index n = 0;
  for (const auto& [k, c] : f.coefficients()) {
    ks.push_back(k);
    cs(n++) = c;
  }
  if (ks.empty()) return Eigen::VectorXcd::Zero(grid_nodes(per_dim, f.dim()));
  return exponential_grid_matrix(ks, f.dim(), per_dim) * cs;
}

int grid_level_for(std::int64_t per_dim_required) {
  int level = 0;
  while ((std::int64_t{1} << level) < per_dim_required) ++level;
  return level;
}

int lp_grid_level(const TrigPolynomial& f, int minimum) {
  return std::max(minimum, grid_level_for(2 * f.max_frequency() + 1));
}

int sup_grid_level(const TrigPolynomial& f, int minimum) {
  return std::max(minimum, grid_level_for(8 * f.max_frequency()));
}

double lp_norm_pow(const TrigPolynomial& f, double p, int grid_level) {
  check_p(p);
  const std::int64_t per_dim = pow2(grid_level);
  const std::int64_t required = 2 * f.max_frequency() + 1;
  if (per_dim < required) throw GridTooCoarse(per_dim, required);
  if (f.empty()) return 0.0;
  if (p == 2.0) {
    const double l2 = f.coefficient_l2();
    return l2 * l2;
  }
  const Eigen::VectorXcd values = evaluate_on_grid(f, per_dim);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i)
    sum += std::pow(std::abs(values(i)), p);
  return sum / static_cast<double>(values.size());
}

double lp_norm(const TrigPolynomial& f, double p, int grid_level) {
  return std::pow(lp_norm_pow(f, p, grid_level), 1.0 / p);
}

SupNormEstimate sup_norm(const TrigPolynomial& f, int grid_level) {
  const std::int64_t per_dim = pow2(grid_level);
  const std::int64_t K = f.max_frequency();
  const std::int64_t required = std::max<std::int64_t>(8 * K, 1);
  if (per_dim < required) throw GridTooCoarse(per_dim, required);
  SupNormEstimate out;
  out.grid_per_dim = per_dim;
  out.oversampling = static_cast<double>(per_dim) / static_cast<double>(std::max<std::int64_t>(K, 1));
  if (f.empty()) return out;
  out.value = evaluate_on_grid(f, per_dim).cwiseAbs().maxCoeff();
  return out;
}

// ---------------------------------------------------------------------------
// Function classes

Complex bernoulli_kernel_coefficient(double r, std::int64_t k) {
  if (k == 0) return 1.0;
  const double magnitude = std::pow(static_cast<double>(k < 0 ? -k : k), -r);
  const double phase = (k > 0 ? -1.0 : 1.0) * r * kPi / 2.0;
  return std::polar(magnitude, phase);
}

BernoulliKernel bernoulli_kernel_coefficients(double r, std::int64_t K) {
  if (!(r > 0.0)) throw InvalidArgument("kernel smoothness r must be > 0");
  if (K < 1) throw InvalidArgument("kernel truncation K must be >= 1");
  BernoulliKernel out;
  for (std::int64_t k = -K; k <= K; ++k)
    out.coefficients.set(Frequency{k}, bernoulli_kernel_coefficient(r, k));
  out.truncation = K;
  if (r > 1.0)
    out.tail_bound = 2.0 * std::pow(static_cast<double>(K), 1.0 - r) / (r - 1.0);
  return out;
}

TrigPolynomial wrq_element(const TrigPolynomial& phi, double r, double q,
                           int grid_level) {
  if (!(r > 0.0)) throw InvalidArgument("smoothness r must be > 0");
  const double norm = lp_norm(phi, q, grid_level);
  if (norm > 1.0 + 1e-9)
    throw NormViolation("||phi||_q = " + std::to_string(norm) + " exceeds 1");
  TrigPolynomial f(phi.dim());
  for (const auto& [k, c] : phi.coefficients()) {
    Complex factor = 1.0;
    for (std::size_t j = 0; j < k.dim(); ++j)
      factor *= bernoulli_kernel_coefficient(r, k[j]);
    f.set(k, c * factor);
  }
  return f;
}

double SmoothnessBudget::level_budget(int j) const {
  const double jbar = std::max(j, 1);
  return std::pow(2.0, -a * j) *
         std::pow(jbar, static_cast<double>(d - 1) * b);
}

std::size_t SupportRule::count_for(int level, std::size_t level_size) const {
  const auto lvl = static_cast<std::size_t>(level);
  if (lvl < counts.size()) return std::min(counts[lvl], level_size);
  if (max_terms_per_level == 0) return level_size;
  return std::min(max_terms_per_level, level_size);
}

WabElement wab_element(const SmoothnessBudget& budget, const SupportRule& rule,
                       std::uint64_t seed) {
  if (budget.d < 1) throw InvalidArgument("budget dimension must be >= 1");
  if (budget.max_level < 0) throw InvalidArgument("max_level must be >= 0");
  if (!(budget.a >= 0.0)) throw InvalidArgument("budget exponent a must be >= 0");
  Rng rng = make_rng(seed, 0);
  std::exponential_distribution<double> weight(1.0);
  WabElement out;
  out.f = TrigPolynomial(budget.d);
  for (int j = 0; j <= budget.max_level; ++j) {
    const FrequencySet level = dyadic_level_set(j, budget.d);
    const std::size_t count = rule.count_for(j, level.size());
    TrigPolynomial block(budget.d);
    if (count == 0) {
      out.skipped_levels.push_back(j);
      out.levels.push_back(std::move(block));
      continue;
    }
    std::vector<std::size_t> order(level.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::vector<double> w(count);
    for (double& x : w) x = weight(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    const double target = budget.level_budget(j);
    for (std::size_t i = 0; i < count; ++i) {
      const double phase = kTwoPi * uniform01(rng);
      block.set(level[order[i]], std::polar(target * w[i] / total, phase));
    }
    out.f += block;
    out.levels.push_back(std::move(block));
  }
  return out;
}

std::vector<TrigPolynomial> level_decomposition(const TrigPolynomial& f) {
  std::vector<TrigPolynomial> levels;
  for (const auto& [k, c] : f.coefficients()) {
    const auto j = static_cast<std::size_t>(dyadic_level(k));
    while (levels.size() <= j) levels.emplace_back(f.dim());
    levels[j].set(k, c);
  }
  return levels;
}

TrigPolynomial mixed_difference(const TrigPolynomial& f, int l,
                                std::span<const double> t,
                                std::span<const std::size_t> e) {
  if (l < 1) throw InvalidArgument("difference order l must be >= 1");
  if (t.size() != f.dim())
    throw DimensionMismatch("step vector length must equal the dimension");
  std::vector<bool> seen(f.dim(), false);
  for (std::size_t j : e) {
    if (j >= f.dim()) throw InvalidArgument("coordinate subset index out of range");
    if (seen[j]) throw InvalidArgument("coordinate subset has duplicates");
    if (t[j] == 0.0) throw InvalidArgument("steps t_j must be nonzero on e");
    seen[j] = true;
  }
  TrigPolynomial out(f.dim());
  for (const auto& [k, c] : f.coefficients()) {
    Complex factor = 1.0;
    for (std::size_t j : e) {
      const Complex step = std::polar(1.0, static_cast<double>(k[j]) * t[j]) - 1.0;
      for (int i = 0; i < l; ++i) factor *= step;
    }
    out.set(k, c * factor);
  }
  return out;
}

double mixed_difference_seminorm(const TrigPolynomial& f, double r, int l,
                                 std::span<const double> t,
                                 std::span<const std::size_t> e, double p,
                                 int grid_level) {
  const TrigPolynomial diff = mixed_difference(f, l, t, e);
  double scale = 1.0;
  for (std::size_t j : e) scale *= std::pow(std::abs(t[j]), r);
  return lp_norm(diff, p, grid_level) / scale;
}

}  // namespace usdlab
