#include <benchmark/benchmark.h>

#include <random>

#include "gmmfit/ak_metric.hpp"
#include "gmmfit/mixtures.hpp"
#include "gmmfit/shape_restricted.hpp"

using namespace gmmfit;

namespace {

MixtureParams mixture(int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MixtureParams th;
  for (int i = 0; i < k; ++i) th.components.push_back({1.0 / k, 6 * u(rng) - 3, 0.5 + 2 * u(rng)});
  return th;
}

void BM_SignRuns(benchmark::State& st) {
  auto shape = ShapePolyConfig::make(0.1);
  auto p = subtract(mixture_approx(mixture(static_cast<int>(st.range(0)), 1), shape),
                    mixture_approx(mixture(static_cast<int>(st.range(0)), 2), shape));
  for (auto _ : st) benchmark::DoNotOptimize(sign_runs(p));
}
BENCHMARK(BM_SignRuns)->Arg(1)->Arg(2)->Arg(4);

void BM_AkNorm(benchmark::State& st) {
  auto shape = ShapePolyConfig::make(0.1);
  const int k = static_cast<int>(st.range(0));
  auto p = subtract(mixture_approx(mixture(k, 3), shape), mixture_approx(mixture(k, 4), shape));
  for (auto _ : st) benchmark::DoNotOptimize(ak_norm(p, 4 * k));
}
BENCHMARK(BM_AkNorm)->Arg(1)->Arg(2)->Arg(4);

void BM_MixtureL1(benchmark::State& st) {
  const int k = static_cast<int>(st.range(0));
  auto a = mixture(k, 5), b = mixture(k, 6);
  for (auto _ : st) benchmark::DoNotOptimize(l1_distance(a, b));
}
BENCHMARK(BM_MixtureL1)->Arg(1)->Arg(2)->Arg(4);

void BM_MixtureApprox(benchmark::State& st) {
  auto shape = ShapePolyConfig::make(0.01);
  auto th = mixture(static_cast<int>(st.range(0)), 7);
  for (auto _ : st) benchmark::DoNotOptimize(mixture_approx(th, shape));
}
BENCHMARK(BM_MixtureApprox)->Arg(1)->Arg(3);

}  // namespace
