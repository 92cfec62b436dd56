#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "usdlab/errors.hpp"
#include "usdlab/random.hpp"
#include "usdlab/rate_fit.hpp"
#include "usdlab/recovery.hpp"

using namespace usdlab;

namespace {

Dictionary exps(std::int64_t N) { return Dictionary::exponentials(hyperbolic_cross(N, 1)); }

// Random combination of `v` distinct elements of the dictionary.
TrigPolynomial sparse_target(const Dictionary& D, std::size_t v, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::vector<std::size_t> idx(D.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  TrigPolynomial f(D.dim());
  for (std::size_t i = 0; i < v; ++i) f += complex_normal(rng) * D[idx[i]];
  return f;
}

TrigPolynomial dense_target(const Dictionary& D, std::uint64_t seed) {
  Rng rng = make_rng(seed, 1);
  TrigPolynomial f(D.dim());
  for (std::size_t i = 0; i < D.size(); ++i) f += complex_normal(rng) / (1.0 + static_cast<double>(i * i % 7)) * D[i];
  return f;
}

Eigen::VectorXcd random_vector(Eigen::Index n, Rng& rng) {
  Eigen::VectorXcd x(n);
  for (auto& c : x) c = complex_normal(rng);
  return x;
}

}  // namespace

TEST_CASE("projection examples") {
  const auto D = exps(3);
  const auto xi = PointSet::uniform(20, 1, 2);
  TrigPolynomial f = Complex(0.5, 1.0) * D[1] + Complex(-2.0, 0.0) * D[4];
  for (double p : {2.0, 3.0, 4.0}) {
    const auto inst = DiscreteInstance::sample(f, D, xi, p);
    const std::size_t J[] = {1, 4};
    const auto pr = chebyshev_projection(inst, J);
    CHECK(pr.residual_norm <= 1e-9);
    CHECK(std::abs(pr.coefficients(0) - Complex(0.5, 1.0)) < 1e-8);
    CHECK(std::abs(pr.coefficients(1) - Complex(-2.0, 0.0)) < 1e-8);
    const auto empty = chebyshev_projection(inst, std::span<const std::size_t>{});
    CHECK(empty.coefficients.size() == 0);
    CHECK((empty.residual - inst.f_values).norm() == 0.0);
    CHECK(empty.residual_norm == doctest::Approx(inst.norm(inst.f_values)));
  }
  const std::size_t dup[] = {0, 0};
  CHECK_THROWS_AS(chebyshev_projection(DiscreteInstance::sample(f, D, xi, 2.0), dup), RankDeficient);
}

TEST_CASE("p = 4 projection on one column matches a dense scan") {
  Rng rng = make_rng(5, 5);
  for (int inst_id = 0; inst_id < 20; ++inst_id) {
    DiscreteInstance inst;
    inst.p = 4.0;
    inst.f_values.resize(3);
    inst.dict_values.resize(3, 1);
    for (int j = 0; j < 3; ++j) {
      inst.f_values(j) = 4.0 * uniform01(rng) - 2.0;
      inst.dict_values(j, 0) = 4.0 * uniform01(rng) - 2.0;
    }
    auto obj = [&](double c) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += std::pow(std::abs(inst.f_values(j) - c * inst.dict_values(j, 0)), 4);
      return s;
    };
    // Real data: conjugation symmetry and convexity put the minimizer on R.
    double best = 0.0, bv = obj(0.0);
    for (double c = -20.0; c <= 20.0; c += 1e-3)
      if (obj(c) < bv) bv = obj(c), best = c;
    const double lo = best - 1e-3;
    for (double c = lo; c <= best + 1e-3; c += 1e-8)
      if (obj(c) < bv) bv = obj(c), best = c;
    const std::size_t J[] = {0};
    const auto pr = chebyshev_projection(inst, J);
    CHECK(pr.converged);
    CHECK(std::abs(pr.coefficients(0).imag()) < 1e-9);
    CHECK(std::abs(pr.coefficients(0).real() - best) < 1e-6);
    CHECK(std::pow(pr.residual_norm, 4) * 3.0 <= bv * (1 + 1e-9));
  }
}

TEST_CASE("p = 2 projection is least squares") {
  Rng rng = make_rng(8, 0);
  for (int t = 0; t < 20; ++t) {
    DiscreteInstance inst;
    inst.p = 2.0;
    inst.f_values = random_vector(30, rng);
    inst.dict_values.resize(30, 8);
    for (Eigen::Index c = 0; c < 8; ++c) inst.dict_values.col(c) = random_vector(30, rng);
    const std::size_t J[] = {0, 2, 3, 7};
    const auto pr = chebyshev_projection(inst, J);
    const Eigen::MatrixXcd A = inst.dict_values(Eigen::all, std::vector<Eigen::Index>{0, 2, 3, 7});
    const Eigen::VectorXcd ls = A.colPivHouseholderQr().solve(inst.f_values);
    CHECK((pr.coefficients - ls).norm() <= 1e-10 * ls.norm());
    // IRLS next to p = 2 lands next to the direct solution.
    DiscreteInstance near = inst;
    near.p = 2.0 + 1e-6;
    const auto irls = chebyshev_projection(near, J);
    CHECK((irls.coefficients - ls).norm() <= 1e-4 * ls.norm());
  }
}

TEST_CASE("norming functional") {
  Rng rng = make_rng(21, 0);
  {
    const Eigen::VectorXcd r = random_vector(9, rng), g = random_vector(9, rng);
    const Complex F = norming_functional_action(r, g, 2.0);
    CHECK(std::abs(F - r.dot(g) / 9.0 / (r.norm() / 3.0)) < 1e-13);
  }
  DiscreteInstance unit;
  for (int t = 0; t < 1000; ++t) {
    const double p = 1.2 + 6.0 * uniform01(rng);
    const Eigen::Index m = 2 + t % 11;
    const Eigen::VectorXcd r = random_vector(m, rng), g = random_vector(m, rng);
    unit.p = p;
    unit.weights.resize(0);
    unit.f_values = r;
    const double nr = unit.norm(r), ng = unit.norm(g);
    CHECK(std::abs(norming_functional_action(r, r, p) - nr) <= 1e-12 * nr);
    CHECK(std::abs(norming_functional_action(r, g, p)) <= ng * (1 + 1e-12));
    // Equality for g proportional to r.
    const Complex s = complex_normal(rng);
    CHECK(std::abs(norming_functional_action(r, s * r, p)) == doctest::Approx(std::abs(s) * nr).epsilon(1e-12));
  }
  CHECK_THROWS_AS(norming_functional_action(Eigen::VectorXcd::Zero(3), Eigen::VectorXcd::Ones(3), 2.0),
                  InvalidArgument);
}

TEST_CASE("WCGA exact recovery on an exact-quadrature set") {
  const auto D = exps(6);
  const auto xi = PointSet::equispaced(13, 1);
  for (std::size_t v : {1u, 4u}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto f = sparse_target(D, v, s);
      const auto inst = DiscreteInstance::sample(f, D, xi, 2.0);
      WcgaOptions o;
      o.max_iter = v;
      const auto a = wcga(inst, o);
      CHECK(a.trace.size() == v);
      CHECK(a.residual_norm <= (v == 1 ? 1e-10 : 1e-8));
      for (std::size_t i = 1; i < a.trace.size(); ++i)
        CHECK(a.trace[i].residual_norm <= a.trace[i - 1].residual_norm * (1 + 1e-12));
    }
  }
  CHECK(wcga_iteration_budget(1.0, 1.0, 4) == doctest::Approx(std::ceil(std::log(4.0) * 4.0)));
}

TEST_CASE("WCGA residuals are nonincreasing at p != 2") {
  const auto D = exps(5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto inst = DiscreteInstance::sample(dense_target(D, s), D, PointSet::uniform(40, 1, s), 3.0 + s % 3);
    WcgaOptions o;
    o.max_iter = 8;
    o.t = 0.7;
    const auto a = wcga(inst, o);
    for (std::size_t i = 1; i < a.trace.size(); ++i)
      CHECK(a.trace[i].residual_norm <= a.trace[i - 1].residual_norm * (1 + 1e-9));
    std::vector<std::size_t> sorted = a.support;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  }
}

TEST_CASE("oracle examples and dominance") {
  const auto D = exps(3);
  const auto xi = PointSet::uniform(25, 1, 3);
  const auto f = dense_target(D, 2);
  for (double p : {2.0, 4.0}) {
    const auto inst = DiscreteInstance::sample(f, D, xi, p);
    const auto zero = best_v_term_oracle(inst, 0);
    CHECK(zero.residual_norm == doctest::Approx(inst.norm(inst.f_values)));
    std::vector<std::size_t> all(D.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const auto full = best_v_term_oracle(inst, D.size());
    CHECK(full.residual_norm == doctest::Approx(chebyshev_projection(inst, all).residual_norm).epsilon(1e-9));
  }
  OracleOptions small;
  small.cap = 10;
  CHECK_THROWS_AS(best_v_term_oracle(DiscreteInstance::sample(f, D, xi, 2.0), 3, small), CapExceeded);

  const auto D7 = exps(3);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const double p = s % 2 ? 4.0 : 2.0;
    const auto inst = DiscreteInstance::sample(dense_target(D7, 100 + s), D7, PointSet::uniform(15, 1, s), p);
    for (std::size_t v : {1u, 2u, 3u}) {
      WcgaOptions o;
      o.max_iter = v;
      const double w = wcga(inst, o).residual_norm;
      const double b = best_v_term_oracle(inst, v).residual_norm;
      CHECK(b <= w * (1 + 1e-9));
    }
  }
}

TEST_CASE("block schedule") {
  CHECK(block_schedule(3, 0.5, 1, 10) == std::vector<std::size_t>{8, 5, 4, 2, 2, 1, 1, 0});
  // Direct floor formula with a d = 2 factor.
  const auto s = block_schedule(4, 0.75, 2, 12);
  for (int j = 4; j <= 12; ++j)
    CHECK(s[static_cast<std::size_t>(j - 4)] ==
          static_cast<std::size_t>(std::floor(std::exp2(4 - 0.75 * (j - 4)) * j)));
}

TEST_CASE("block greedy approximant") {
  const SmoothnessBudget B{1.0, 0.0, 1, 9};
  const auto w = wab_element(B, SupportRule{}, 4);
  // n past the support: f is reproduced exactly.
  const auto exact = block_greedy_av(w.levels, 10, 0.5, 2.0, BlockTarget{});
  CHECK(exact.error <= 1e-14);
  CHECK(exact.approximant.coefficients() == w.f.coefficients());
  CHECK(exact.total_terms == w.f.size());
  // Levels below n are kept whole.
  const auto r = block_greedy_av(w.levels, 4, 0.5, 2.0, BlockTarget{});
  for (const auto& [k, c] : w.f.coefficients())
    if (dyadic_level(k) < 4) CHECK(r.approximant.coefficient(k) == c);
  CHECK(r.schedule == block_schedule(4, 0.5, 1, 9));
}

TEST_CASE("block greedy error decays like v^(-a-1/2)") {
  for (double a : {0.75, 1.0}) {
    std::vector<std::pair<double, double>> pts;
    for (int n = 3; n <= 8; ++n) {
      double logerr = 0.0, terms = 0.0;
      for (std::uint64_t s = 0; s < 5; ++s) {
        const auto w = wab_element(SmoothnessBudget{a, 0.0, 1, 13}, SupportRule{}, 1000 * s + 7);
        BlockTarget target;
        target.grid_level = 15;
        const auto r = block_greedy_av(w.levels, n, a / 2, 2.0, target);
        logerr += std::log(r.error);
        terms += static_cast<double>(r.total_terms);
      }
      pts.emplace_back(terms / 5, std::exp(logerr / 5));
    }
    const auto fit = fit_rate(pts);
    CHECK(std::abs(fit.slope + a + 0.5) <= 0.2);
  }
}

TEST_CASE("recovery pipeline") {
  const auto D = exps(4);
  const auto grid = PointSet::equispaced(9, 1);
  for (std::uint64_t s = 0; s < 5; ++s) {
    RecoveryOptions o;
    o.method = RecoveryMethod::oracle;
    const auto rep = recovery_pipeline(sparse_target(D, 2, s), D, grid, 2, 2.0, o, std::nullopt);
    CHECK(rep.continuous_error <= 1e-8);
    CHECK_FALSE(rep.certified);
  }

  // Certified set for all 2v-subsets, then both recovery inequalities.
  const std::size_t v = 2;
  const auto coll = SubspaceCollection::all(D, 2 * v);
  const auto found = find_usd_points(coll, 2.0, 48, 20, 3);
  REQUIRE(found.found);
  for (std::uint64_t s = 0; s < 10; ++s) {
    RecoveryOptions o;
    o.method = s % 2 ? RecoveryMethod::wcga : RecoveryMethod::oracle;
    o.sup_oracle_exponent = 16.0;
    const auto f = dense_target(D, 40 + s);
    const auto rep = recovery_pipeline(f, D, *found.points, v, 2.0, o, found.certificate);
    CHECK(rep.certified);
    REQUIRE(rep.bound_mu_xi.has_value());
    REQUIRE(rep.bound_sup.has_value());
    const double Dc = rep.one_sided_constant;
    CHECK(*rep.bound_mu_xi == doctest::Approx(std::sqrt(2.0) * (2 * Dc + 1) * *rep.sigma_v_mu_xi));
    if (o.method == RecoveryMethod::oracle) {
      CHECK(rep.continuous_error <= *rep.bound_mu_xi + 1e-8);
      CHECK(rep.continuous_error <= *rep.bound_sup + 1e-8);
    }
    CHECK(rep.terms <= v);
  }
}
