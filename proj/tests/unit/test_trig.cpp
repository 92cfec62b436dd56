#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "usdlab/dictionary.hpp"
#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"
#include "usdlab/serialization.hpp"
#include "usdlab/trig.hpp"

using namespace usdlab;
using std::numbers::pi;

namespace {

PointSet pts(const std::vector<std::vector<double>>& v) { return PointSet(v); }

std::set<std::vector<std::int64_t>> as_set(const FrequencySet& s) {
  std::set<std::vector<std::int64_t>> out;
  for (const auto& k : s) out.insert(k.components());
  return out;
}

TrigPolynomial random_poly(std::size_t d, int K, std::size_t terms, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::uniform_int_distribution<int> kd(-K, K);
  TrigPolynomial f(d);
  for (std::size_t t = 0; t < terms; ++t) {
    std::vector<std::int64_t> k(d);
    for (auto& x : k) x = kd(rng);
    f.add(Frequency(k), complex_normal(rng));
  }
  return f;
}

}  // namespace

TEST_CASE("hyperbolic cross examples") {
  auto h = hyperbolic_cross(3, 1);
  CHECK(h.size() == 7);
  CHECK(h[0] == Frequency{-3});
  CHECK(h[6] == Frequency{3});
  CHECK(hyperbolic_cross(2, 2).size() == 21);
  CHECK(hyperbolic_cross(1, 3).size() == 27);
}

TEST_CASE("hyperbolic cross matches brute force and its size formula") {
  for (std::size_t d = 1; d <= 3; ++d) {
    for (std::int64_t N : {1, 2, 5, 8}) {
      std::set<std::vector<std::int64_t>> brute;
      std::vector<std::int64_t> k(d, -N);
      for (;;) {
        std::int64_t prod = 1;
        for (auto x : k) prod *= std::max<std::int64_t>(std::abs(x), 1);
        if (prod <= N) brute.insert(k);
        std::size_t j = 0;
        while (j < d && k[j] == N) k[j++] = -N;
        if (j == d) break;
        ++k[j];
      }
      const auto h = hyperbolic_cross(N, d);
      CHECK(as_set(h) == brute);
      CHECK(hyperbolic_cross_size(N, d) == brute.size());
    }
  }
  CHECK(hyperbolic_cross(50, 1).size() == 101);
}

TEST_CASE("hyperbolic cross is symmetric under sign flips and permutations") {
  const auto h = hyperbolic_cross(6, 3);
  const auto s = as_set(h);
  for (const auto& k : h) {
    auto flipped = k.components();
    flipped[1] = -flipped[1];
    CHECK(s.count(flipped));
    auto perm = k.components();
    std::rotate(perm.begin(), perm.begin() + 1, perm.end());
    CHECK(s.count(perm));
  }
}

TEST_CASE("hyperbolic cross refuses oversized requests") {
  CHECK_THROWS_AS(hyperbolic_cross(1000, 3, 1000.0), CapExceeded);
  try {
    hyperbolic_cross(1000, 3, 1000.0);
  } catch (const CapExceeded& e) {
    CHECK(e.predicted() == doctest::Approx(static_cast<double>(hyperbolic_cross_size(1000, 3))));
  }
}

TEST_CASE("dyadic block examples") {
  const int s0[] = {0};
  CHECK(as_set(dyadic_block(s0)) == std::set<std::vector<std::int64_t>>{{0}});
  const int s2[] = {2};
  CHECK(as_set(dyadic_block(s2)) == std::set<std::vector<std::int64_t>>{{-3}, {-2}, {2}, {3}});
  const int s11[] = {1, 1};
  CHECK(as_set(dyadic_block(s11)) ==
        std::set<std::vector<std::int64_t>>{{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
}

TEST_CASE("dyadic blocks tile the box exactly") {
  for (std::size_t d = 1; d <= 2; ++d) {
    std::map<std::vector<std::int64_t>, int> hits;
    std::vector<int> s(d, 0);
    for (;;) {
      for (const auto& k : dyadic_block(s)) hits[k.components()]++;
      std::size_t j = 0;
      while (j < d && s[j] == 5) s[j++] = 0;
      if (j == d) break;
      ++s[j];
    }
    std::size_t box = 1;
    for (std::size_t j = 0; j < d; ++j) box *= 63;
    CHECK(hits.size() == box);
    for (const auto& [k, n] : hits) {
      CHECK(n == 1);
      for (auto x : k) CHECK(std::abs(x) < 32);
    }
  }
}

TEST_CASE("dyadic index and level") {
  CHECK(dyadic_index(Frequency{0, -5}) == std::vector<int>{0, 3});
  CHECK(dyadic_level(Frequency{7, -8}) == 3 + 4);
  CHECK(dyadic_level_set(3, 1).size() == 8);
  CHECK(dyadic_level_set(0, 2).size() == 1);
  // level 1 in d = 2: s = (1,0) or (0,1): 2 + 2 frequencies.
  CHECK(dyadic_level_set(1, 2).size() == 4);
}

TEST_CASE("frequency set invariants") {
  CHECK_THROWS_AS(FrequencySet(1, {Frequency{1}, Frequency{1}}), InvalidArgument);
  CHECK_THROWS_AS(FrequencySet(2, {Frequency{1}}), DimensionMismatch);
  FrequencySet s(1, {Frequency{3}, Frequency{-1}, Frequency{0}});
  CHECK(s[0] == Frequency{-1});
  CHECK(s.contains(Frequency{3}));
  CHECK_FALSE(s.contains(Frequency{2}));
}

TEST_CASE("evaluate examples") {
  const PointSet xi({{0.3}, {2.0}});
  auto c = evaluate(TrigPolynomial::constant(1, Complex(2.0, -1.0)), xi);
  CHECK(std::abs(c[0] - Complex(2.0, -1.0)) < 1e-15);
  CHECK(std::abs(evaluate(TrigPolynomial::monomial(Frequency{5}), pts({{0.0}}))[0] - 1.0) < 1e-15);
  TrigPolynomial f(1);
  f.set(Frequency{1}, 1.0);
  f.set(Frequency{-1}, 1.0);
  CHECK(std::abs(evaluate(f, pts({{pi / 3}}))[0] - 1.0) < 1e-14);
  CHECK_THROWS_AS(evaluate(f, pts({{0.0, 1.0}})), DimensionMismatch);
}

TEST_CASE("evaluate agrees with direct summation in several dimensions") {
  const auto f = random_poly(2, 9, 30, 5);
  const PointSet xi = PointSet::uniform(40, 2, 17);
  const auto vals = evaluate(f, xi);
  for (std::size_t j = 0; j < xi.size(); ++j) {
    Complex s = 0.0;
    for (const auto& [k, c] : f.coefficients())
      s += c * std::exp(Complex(0.0, static_cast<double>(k[0]) * xi.point(j)[0] +
                                         static_cast<double>(k[1]) * xi.point(j)[1]));
    CHECK(std::abs(vals[j] - s) < 1e-12);
  }
  const auto grid = evaluate_on_grid(f, 32);
  const auto direct = evaluate(f, PointSet::equispaced(32, 2));
  for (std::size_t j = 0; j < direct.size(); ++j)
    CHECK(std::abs(grid(static_cast<Eigen::Index>(j)) - direct[j]) < 1e-12);
}

TEST_CASE("lp norm examples") {
  for (double p : {1.0, 2.0, 3.5, 6.0}) {
    CHECK(lp_norm(TrigPolynomial::constant(1, 1.0), p, 6) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lp_norm(TrigPolynomial::monomial(Frequency{3}), p, 6) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
  TrigPolynomial c(1);
  c.set(Frequency{1}, std::sqrt(2.0) / 2);
  c.set(Frequency{-1}, std::sqrt(2.0) / 2);
  CHECK(lp_norm(c, 2.0, 4) == doctest::Approx(1.0).epsilon(1e-15));
  // Grid quadrature at p = 2 must agree with Parseval once resolved.
  CHECK(std::pow(lp_norm_pow(c, 4.0, 5), 0.25) == doctest::Approx(std::pow(1.5, 0.25)));
  CHECK_THROWS_AS(lp_norm(TrigPolynomial::monomial(Frequency{40}), 3.0, 5), GridTooCoarse);
}

TEST_CASE("Parseval on random polynomials") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t d = 1 + seed % 2;
    const auto f = random_poly(d, 6, 1 + seed % 15, seed);
    const double l2 = f.coefficient_l2();
    CHECK(std::abs(lp_norm(f, 2.0, 6) - l2) <= 1e-10 * l2);
    // Grid quadrature route of |f|^2 (p = 2 + tiny) stays close.
    const double quad = std::sqrt(std::abs(lp_norm_pow(f, 2.0000000001, 5)));
    CHECK(std::abs(quad - l2) <= 1e-6 * l2);
  }
}

TEST_CASE("sup norm examples and grid refusal") {
  CHECK(sup_norm(TrigPolynomial::constant(1, Complex(0.0, -3.0)), 4).value == doctest::Approx(3.0));
  TrigPolynomial dir(1);
  for (int k = -4; k <= 4; ++k) dir.set(Frequency{k}, 1.0);
  CHECK(sup_norm(dir, 6).value == doctest::Approx(9.0).epsilon(1e-13));
  TrigPolynomial cc(1);
  for (int k : {-2, -1, 1, 2}) cc.set(Frequency{k}, 0.5);
  const auto est = sup_norm(cc, 5);
  CHECK(est.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(est.oversampling == doctest::Approx(16.0));
  CHECK_THROWS_AS(sup_norm(TrigPolynomial::monomial(Frequency{5}), 5), GridTooCoarse);
}

TEST_CASE("sup norm dominates lp norms") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto f = random_poly(1, 8, 6, 100 + seed);
    const double s = sup_norm(f, 10).value;
    for (double p : {1.0, 2.0, 4.0, 7.0}) CHECK(s >= lp_norm(f, p, 10) - 1e-8);
  }
}

TEST_CASE("Bernoulli kernel coefficients") {
  const auto F = bernoulli_kernel_coefficients(0.5, 8);
  CHECK(F.coefficients.coefficient(Frequency{0}) == Complex(1.0, 0.0));
  CHECK(std::abs(F.coefficients.coefficient(Frequency{5})) == doctest::Approx(1.0 / std::sqrt(5.0)));
  const double r = 0.5;
  const double dphi = std::arg(F.coefficients.coefficient(Frequency{1})) -
                      std::arg(F.coefficients.coefficient(Frequency{-1}));
  CHECK(dphi == doctest::Approx(-r * pi));
  CHECK_FALSE(F.tail_bound.has_value());
  const auto G = bernoulli_kernel_coefficients(2.0, 100);
  REQUIRE(G.tail_bound.has_value());
  CHECK(*G.tail_bound == doctest::Approx(2.0 * std::pow(100.0, -1.0) / 1.0));
  // Real-valued kernel: compare against the cosine series at a point.
  const double x = 0.7;
  double series = 1.0;
  for (int k = 1; k <= 100; ++k) series += 2.0 * std::pow(k, -2.0) * std::cos(k * x - pi);
  const auto v = evaluate(G.coefficients, pts({{x}}))[0];
  CHECK(std::abs(v.imag()) < 1e-13);
  CHECK(v.real() == doctest::Approx(series).epsilon(1e-13));
}

TEST_CASE("W^r_q elements") {
  const auto one = wrq_element(TrigPolynomial::constant(1, 1.0), 1.0, 2.0, 6);
  CHECK(one.size() == 1);
  CHECK(std::abs(one.coefficient(Frequency{0}) - 1.0) < 1e-15);
  const auto f = wrq_element(TrigPolynomial::monomial(Frequency{2}), 1.0, 2.0, 6);
  CHECK(std::abs(f.coefficient(Frequency{2}) - 0.5 * std::exp(Complex(0.0, -pi / 2))) < 1e-15);
  auto phi = random_poly(2, 5, 10, 3);
  phi *= Complex(0.5 / lp_norm(phi, 3.0, 6), 0.0);
  const auto g = wrq_element(phi, 1.5, 3.0, 6);
  CHECK(g.support() == phi.support());
  auto big = phi;
  big *= 4.0;
  CHECK_THROWS_AS(wrq_element(big, 1.5, 3.0, 6), NormViolation);
}

TEST_CASE("W^{a,b}_A elements saturate their level budgets") {
  {
    const auto w = wab_element(SmoothnessBudget{1.0, 0.0, 1, 0}, SupportRule{}, 1);
    CHECK(w.f.size() == 1);
    CHECK(std::abs(w.f.coefficient(Frequency{0})) == doctest::Approx(1.0).epsilon(1e-15));
  }
  {
    const auto w = wab_element(SmoothnessBudget{1.0, 0.0, 1, 4}, SupportRule{}, 2);
    CHECK(w.levels[1].a_norm() == doctest::Approx(0.5).epsilon(1e-14));
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SmoothnessBudget B{0.75, 1.0, 2, 5};
    SupportRule rule;
    rule.max_terms_per_level = 3;
    const auto w = wab_element(B, rule, seed);
    // Independent re-summation by dyadic level of every coefficient.
    std::vector<double> sums(6, 0.0);
    for (const auto& [k, c] : w.f.coefficients()) {
      int level = 0;
      for (std::size_t j = 0; j < k.dim(); ++j) {
        std::int64_t a = std::abs(k[j]);
        int s = 0;
        while (a > 0) {
          a >>= 1;
          ++s;
        }
        level += s;
      }
      sums[static_cast<std::size_t>(level)] += std::abs(c);
    }
    for (int j = 0; j <= 5; ++j) {
      const double budget = std::exp2(-0.75 * j) * std::pow(std::max(j, 1), 1.0);
      CHECK(std::abs(sums[static_cast<std::size_t>(j)] - budget) <= 1e-12 * budget);
      CHECK(B.level_budget(j) == doctest::Approx(budget).epsilon(1e-15));
    }
  }
  const auto w1 = wab_element(SmoothnessBudget{1.0, 0.0, 1, 6}, SupportRule{}, 77);
  const auto w2 = wab_element(SmoothnessBudget{1.0, 0.0, 1, 6}, SupportRule{}, 77);
  CHECK(w1.f.coefficients() == w2.f.coefficients());
  SupportRule skip;
  skip.counts = {1, 0, 2};
  const auto ws = wab_element(SmoothnessBudget{1.0, 0.0, 1, 2}, skip, 5);
  CHECK(ws.skipped_levels == std::vector<int>{1});
}

TEST_CASE("mixed differences") {
  const auto f = random_poly(2, 4, 8, 9);
  const double t[] = {0.3, 0.0};
  const std::size_t none[] = {0};
  CHECK(mixed_difference_seminorm(f, 1.0, 2, t, std::span<const std::size_t>(none, 0), 2.0, 6) ==
        doctest::Approx(lp_norm(f, 2.0, 6)));
  const double t1[] = {0.4};
  const std::size_t e1[] = {0};
  CHECK(mixed_difference_seminorm(TrigPolynomial::constant(1, 3.0), 1.0, 2, t1, e1, 2.0, 6) == 0.0);
  const double tp[] = {pi};
  CHECK(mixed_difference_seminorm(TrigPolynomial::monomial(Frequency{1}), 0.5, 1, tp, e1, 2.0, 6) ==
        doctest::Approx(2.0 / std::sqrt(pi)).epsilon(1e-14));
  // Coefficient multiplier for a single exponential.
  const Frequency k{3, -2};
  const double t2[] = {0.25, 0.6};
  const std::size_t e2[] = {1};
  const auto g = mixed_difference(TrigPolynomial::monomial(k, Complex(0.5, 0.2)), 3, t2, e2);
  const Complex mult = std::pow(std::exp(Complex(0.0, -2.0 * 0.6)) - 1.0, 3);
  CHECK(std::abs(g.coefficient(k) - Complex(0.5, 0.2) * mult) < 1e-14);
}

TEST_CASE("Nikolskii ratio estimate") {
  const std::size_t N = 4;
  const auto D = Dictionary::exponentials(hyperbolic_cross(static_cast<std::int64_t>(N), 1));
  const auto est = nikolskii_ratio_estimate(D, 2.0, 20, 3, 8);
  CHECK(est.H >= 0.999 * std::sqrt(2.0 * N + 1));
  CHECK(est.H <= std::sqrt(2.0 * N + 1) * (1 + 1e-12));
  const Dictionary single({TrigPolynomial::monomial(Frequency{1})}, 1.0);
  CHECK(nikolskii_ratio_estimate(single, 3.0, 10, 1, 8).H == doctest::Approx(1.0));
  // d = 2 cross at q = 2: the estimate never beats Cauchy-Schwarz and tracks
  // sqrt(N log N) up to a bounded factor.
  for (std::int64_t M : {4, 8, 16, 32}) {
    const auto cross = hyperbolic_cross(M, 2);
    const auto DM = Dictionary::exponentials(cross);
    const double H = nikolskii_ratio_estimate(DM, 2.0, 5, 7, 8).H;
    CHECK(H <= std::sqrt(static_cast<double>(cross.size())) * (1 + 1e-12));
    const double trend = std::sqrt(static_cast<double>(M) * std::log2(static_cast<double>(M)));
    CHECK(H / trend >= 1.0);
    CHECK(H / trend <= 4.0);
  }
}

TEST_CASE("dictionary construction checks the uniform bound") {
  TrigPolynomial g(1);
  g.set(Frequency{0}, 1.0);
  g.set(Frequency{1}, 1.0);
  CHECK_THROWS_AS(Dictionary({g}, 1.5), InvalidArgument);
  CHECK_NOTHROW(Dictionary({g}, 2.0));
  const auto D = exponential_dictionary_1d(7);
  CHECK(D.size() == 7);
  CHECK(D[0].coefficients().begin()->first == Frequency{-3});
  CHECK(D.orthonormal_exponentials());
  const auto S = D.sample(pts({{0.5}, {1.5}}));
  CHECK(std::abs(S(1, 0) - std::exp(Complex(0.0, -4.5))) < 1e-14);
}

TEST_CASE("polynomial JSON round trip keeps 17 digits") {
  const auto f = random_poly(2, 5, 12, 44);
  const std::string text = to_json(f);
  CHECK(text.find("\"terms\"") != std::string::npos);
  const auto g = trig_polynomial_from_json(text);
  CHECK(g.coefficients() == f.coefficients());
  const auto bare = trig_polynomial_from_json("[[[1], 0.5, -0.25], [[-2], 1, 0]]");
  CHECK(bare.coefficient(Frequency{1}) == Complex(0.5, -0.25));
  const auto s = frequency_set_from_json(to_json(hyperbolic_cross(3, 2)));
  CHECK(s == hyperbolic_cross(3, 2));
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(trig_polynomial_from_json("[[[1], 0.5]]"), InvalidArgument);
}
