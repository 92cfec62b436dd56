#include <benchmark/benchmark.h>

#include "usdlab/discretization.hpp"
#include "usdlab/entropy.hpp"
#include "usdlab/recovery.hpp"
#include "usdlab/trig.hpp"

using namespace usdlab;

static void BM_EvaluateHyperbolicCross(benchmark::State& state) {
  const auto freqs = hyperbolic_cross(state.range(0), 2);
  TrigPolynomial f(2);
  for (const auto& k : freqs) f.set(k, Complex(1.0, 0.5));
  const PointSet xi = PointSet::uniform(1024, 2, 1);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(f, xi));
  state.SetLabel(std::to_string(freqs.size()) + " terms");
}
BENCHMARK(BM_EvaluateHyperbolicCross)->Arg(16)->Arg(64);

static void BM_CheckUsdEigen(benchmark::State& state) {
  const auto coll = SubspaceCollection::all(exponential_dictionary_1d(7), 2);
  const PointSet xi = PointSet::uniform(128, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(check_usd(xi, coll, 2.0));
}
BENCHMARK(BM_CheckUsdEigen);

static void BM_RatioMultistart(benchmark::State& state) {
  const Dictionary D = exponential_dictionary_1d(7);
  const PointSet xi = PointSet::uniform(512, 1, 5);
  const std::vector<std::size_t> J{0, 3};
  RatioOptions o;
  o.starts = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(subspace_ratio_bounds(J, D, xi, 4.0, o));
}
BENCHMARK(BM_RatioMultistart)->Arg(8)->Arg(64);

static void BM_FarthestPointTrace(benchmark::State& state) {
  const Dictionary D = exponential_dictionary_1d(64);
  const auto coeffs = random_a1_coefficients(64, static_cast<std::size_t>(state.range(0)), 11);
  const SampledClass S = SampledClass::from_combinations(D, coeffs, 10);
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_trace(S, S.size() / 2));
}
BENCHMARK(BM_FarthestPointTrace)->Arg(256)->Arg(1024);

static void BM_WcgaL2(benchmark::State& state) {
  const Dictionary D = Dictionary::exponentials(hyperbolic_cross(511, 1));
  const WabElement w = wab_element(SmoothnessBudget{1.0, 0.0, 1, 8}, SupportRule{}, 7);
  const auto v = static_cast<std::size_t>(state.range(0));
  const PointSet xi = PointSet::uniform(8 * v, 1, 9);
  const DiscreteInstance inst = DiscreteInstance::sample(w.f, D, xi, 2.0);
  WcgaOptions o;
  o.max_iter = v;
  for (auto _ : state) benchmark::DoNotOptimize(wcga(inst, o));
}
BENCHMARK(BM_WcgaL2)->Arg(16)->Arg(64);

static void BM_ChebyshevIrls(benchmark::State& state) {
  const Dictionary D = exponential_dictionary_1d(12);
  const PointSet xi = PointSet::uniform(256, 1, 13);
  TrigPolynomial f(1);
  for (int k = -8; k <= 8; ++k) f.set(Frequency{k}, Complex(1.0 / (1 + k * k), 0.1 * k));
  const DiscreteInstance inst = DiscreteInstance::sample(f, D, xi, 4.0);
  const std::vector<std::size_t> J{1, 4, 6, 9};
  for (auto _ : state) benchmark::DoNotOptimize(chebyshev_projection(inst, J));
}
BENCHMARK(BM_ChebyshevIrls);

BENCHMARK_MAIN();
