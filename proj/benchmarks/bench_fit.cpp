#include <benchmark/benchmark.h>

#include "gmmfit/density_estimation.hpp"
#include "gmmfit/fit_engine.hpp"
#include "gmmfit/mixtures.hpp"
#include "gmmfit/shape_restricted.hpp"

using namespace gmmfit;

namespace {

const MixtureParams kTruth{Family::gaussian, {{0.4, -3.0, 1.0}, {0.6, 3.0, 2.0}}};

void BM_EstimateDensity(benchmark::State& st) {
  auto xs = sample(kTruth, static_cast<std::size_t>(st.range(0)), 11);
  for (auto _ : st) benchmark::DoNotOptimize(estimate_density(xs, 2, 0.1));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_EstimateDensity)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_Objective(benchmark::State& st) {
  auto unit = rescale_to_unit(estimate_density(sample(kTruth, 100000, 12), 2, 0.1));
  const int k = static_cast<int>(st.range(0));
  FitProblem problem{unit.pp, ShapePolyConfig::make(0.1), 4 * k, well_behaved_box(k, 10.0)};
  MixtureParams th;
  for (int i = 0; i < k; ++i) th.components.push_back({1.0 / k, -0.5 + i * 1.0 / k, 2.0});
  for (auto _ : st) benchmark::DoNotOptimize(objective(problem, th));
}
BENCHMARK(BM_Objective)->Arg(1)->Arg(2)->Arg(3);

}  // namespace
