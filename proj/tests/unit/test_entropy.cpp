#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "usdlab/entropy.hpp"
#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"

using namespace usdlab;

namespace {

// Representatives given directly by their grid values.
SampledClass rows(const std::vector<std::vector<double>>& v) {
  SampledClass::Values vals(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v[0].size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v[0].size(); ++j)
      vals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j];
  return SampledClass(vals, 1, static_cast<std::int64_t>(v[0].size()));
}

// Smallest number of centers taken from S covering S at radius eps.
std::size_t exact_min_cover(const SampledClass& S, double eps) {
  const std::size_t n = S.size();
  std::size_t best = n;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto c = static_cast<std::size_t>(__builtin_popcount(mask));
    if (c >= best) continue;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      bool hit = false;
      for (std::size_t j = 0; j < n && !hit; ++j) hit = ((mask >> j) & 1u) && S.distance(i, j) <= eps;
      ok = hit;
    }
    if (ok) best = c;
  }
  return best;
}

EntropyProfile constant_profile(double value, std::size_t len) {
  EntropyProfile p;
  p.eps.assign(len, value);
  for (std::size_t k = 0; (std::size_t{1} << k) < len || k == 0; ++k) p.e.push_back(value);
  return p;
}

}  // namespace

TEST_CASE("greedy cover examples") {
  const auto two = rows({{0.0}, {1.0}});
  CHECK(greedy_cover(two, 0.4).size() == 2);
  CHECK(greedy_cover(two, 1.0).size() == 1);
  // Three collinear points with extreme distance 1 (0, 1/2, 1).
  const auto three = rows({{0.0}, {0.5}, {1.0}});
  CHECK(three.diameter() == doctest::Approx(1.0));
  CHECK(greedy_cover(three, 0.6).size() == 2);
  CHECK(greedy_cover(three, 0.5).size() == 2);
  CHECK(greedy_cover(three, 0.4).size() == 3);
  // Tie to the lowest index and centers taken from S.
  const auto g = greedy_cover(rows({{0.0}, {2.0}, {-2.0}}), 1.0);
  CHECK(g == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("greedy cover against the exhaustive optimum") {
  Rng rng = make_rng(12, 0);
  for (int inst = 0; inst < 60; ++inst) {
    const std::size_t n = 4 + static_cast<std::size_t>(inst % 9);
    std::vector<std::vector<double>> v(n, std::vector<double>(3));
    for (auto& r : v)
      for (auto& x : r) x = uniform01(rng);
    const auto S = rows(v);
    const double eps = 0.15 + 0.4 * uniform01(rng);
    const auto g = greedy_cover(S, eps);
    // Greedy centers are pairwise farther than eps apart, so no ball of
    // radius eps/2 holds two of them.
    CHECK(g.size() >= exact_min_cover(S, eps));
    CHECK(g.size() <= exact_min_cover(S, eps / 2));
    for (std::size_t i = 0; i < n; ++i) {
      double d = 1e300;
      for (auto c : g) d = std::min(d, S.distance(i, c));
      CHECK(d <= eps);
    }
  }
}

TEST_CASE("distance is a metric on the grid values") {
  const auto coeffs = random_a1_coefficients(9, 30, 4);
  const auto S = SampledClass::from_combinations(exponential_dictionary_1d(9), coeffs, 6);
  for (std::size_t i = 0; i < 30; i += 3)
    for (std::size_t j = 0; j < 30; j += 4) {
      CHECK(S.distance(i, j) == S.distance(j, i));
      for (std::size_t k = 0; k < 30; k += 7) CHECK(S.distance(i, k) <= S.distance(i, j) + S.distance(j, k) + 1e-15);
    }
  CHECK(coeffs.col(0).isZero());
  for (Eigen::Index r = 1; r < coeffs.cols(); ++r) CHECK(coeffs.col(r).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("entropy profile") {
  const auto single = rows({{0.3, 0.1}});
  const auto p0 = entropy_numbers(single, 5);
  for (double e : p0.eps) CHECK(e == 0.0);

  const auto coeffs = random_a1_coefficients(16, 300, 8, 4);
  const auto S = SampledClass::from_combinations(exponential_dictionary_1d(16), coeffs, 7);
  const auto prof = entropy_numbers(S, 12);
  CHECK(prof.eps[0] <= 1.0 + 1e-12);
  CHECK(prof.eps.size() == 13);
  for (std::size_t n = 1; n < prof.eps.size(); ++n) CHECK(prof.eps[n] <= prof.eps[n - 1]);
  // 2^9 >= 300 representatives.
  for (std::size_t n = 9; n < prof.eps.size(); ++n) CHECK(prof.eps[n] == 0.0);
  CHECK(prof.e[0] == prof.eps[0]);
  for (std::size_t k = 1; k < prof.e.size(); ++k) CHECK(prof.e[k] == prof.eps[std::size_t{1} << k]);
  CHECK(prof.e.size() == 4);
  CHECK_FALSE(prof.caveats.empty());

  // Bisection over cover sizes agrees with the trace reading.
  for (int n : {0, 1, 3, 5}) {
    const double b = entropy_number_bisection(S, n);
    CHECK(std::abs(b - prof.eps[static_cast<std::size_t>(n)]) <= 1e-4 + 1e-12);
    CHECK(greedy_cover(S, prof.eps[static_cast<std::size_t>(n)]).size() <= (std::size_t{1} << n));
  }
}

TEST_CASE("chaining arithmetic") {
  CHECK(chaining_bound(constant_profile(0.0, 8), 2.0, 1.0, 4) == 0.0);
  const double M = 1.7;
  const auto prof = constant_profile(M, 5);
  const double hand = 1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5 + 1.0 / std::sqrt(5.0);
  CHECK(entropy_sum(prof, 2.0, 4) == doctest::Approx(M * hand).epsilon(1e-15));
  CHECK(chaining_bound(prof, 2.0, M, 4) == doctest::Approx(4.0 * M * 0.5 * M * hand).epsilon(1e-15));
  CHECK_THROWS_AS(chaining_bound(prof, 2.0, M, 9), ProfileTooShort);

  Rng rng = make_rng(3, 3);
  for (int t = 0; t < 50; ++t) {
    EntropyProfile a;
    double cur = 1.0 + uniform01(rng);
    for (int n = 0; n <= 32; ++n) {
      a.eps.push_back(cur);
      cur *= 0.7 + 0.3 * uniform01(rng);
    }
    for (std::size_t k = 0; (std::size_t{1} << k) <= 32; ++k) a.e.push_back(k == 0 ? a.eps[0] : a.eps[std::size_t{1} << k]);
    EntropyProfile b = a;
    for (auto& e : b.eps) e *= 1.0 + uniform01(rng);
    const double p = 1.0 + 5.0 * uniform01(rng);
    const std::size_t m = 1 + static_cast<std::size_t>(t % 32);
    CHECK(chaining_bound(b, p, 1.0, m) >= chaining_bound(a, p, 1.0, m));
    const double ratio = chaining_bound(a, p, 2.0, m) / chaining_bound(a, p, 1.0, m);
    CHECK(ratio == doctest::Approx(std::pow(2.0, std::max(p / 2, p - 1))).epsilon(1e-13));
    CHECK(dyadic_entropy_sum(a, p, m) <= 2.0 * std::sqrt(2.0) * entropy_sum(a, p, m));
  }
}

TEST_CASE("finite-dimensional decay check") {
  CHECK(finite_dim_decay_check(entropy_numbers(rows({{1.0}}), 16), 2, 1, 4));
  // Unit ball of span{e^{ix}, e^{-ix}} with real coefficients.
  const auto D = exponential_dictionary_1d(3);
  Rng rng = make_rng(44, 0);
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(3, 2000);
  for (Eigen::Index r = 0; r < coeffs.cols(); ++r) {
    double x, y;
    do {
      x = 2 * uniform01(rng) - 1;
      y = 2 * uniform01(rng) - 1;
    } while (x * x + y * y > 1.0);
    coeffs(0, r) = x;
    coeffs(2, r) = y;
  }
  const auto S = SampledClass::from_combinations(D, coeffs, 6);
  const auto prof = entropy_numbers(S, 16);
  for (int k = 2; k <= 4; ++k) CHECK(finite_dim_decay_check(prof, 2, 1, k));
}

TEST_CASE("lemma arithmetic") {
  const double s = lem_bound_sum(1.0, 1.0, 64);
  // Independent direct sum.
  double direct = 0.0;
  for (int k = 6; k < 40; ++k) direct += std::exp2(k) * std::exp2(-std::exp2(k) / 64.0);
  CHECK(s == doctest::Approx(direct).epsilon(1e-12));
  const double c = lem_bound_constant(1.0, 1.0);
  CHECK(c == doctest::Approx(2.0 / std::log(2.0)).epsilon(1e-14));
  CHECK(s <= c * 64.0);
  CHECK(lem_bound_sum(0.5, 2.0, 16) <= lem_bound_constant(0.5, 2.0) * 16.0);
}
