#include <benchmark/benchmark.h>

#include "coarselab/experiment.hpp"
#include "coarselab/morse.hpp"
#include "coarselab/randwalk.hpp"
#include "coarselab/relhyp.hpp"
#include "coarselab/spaces.hpp"

using namespace coarselab;

namespace {

std::shared_ptr<const CayleySpace> z2z() {
  return std::make_shared<CayleySpace>(FreeProductGroup::parse("free_product(grid(2), free_group(1))"));
}

void BM_SphereSample(benchmark::State& st) {
  auto sp = z2z();
  Rng rng(1);
  for (auto _ : st) benchmark::DoNotOptimize(sp->sample(rng, st.range(0)));
}
BENCHMARK(BM_SphereSample)->Arg(30)->Arg(300);

void BM_Geodesic(benchmark::State& st) {
  auto sp = z2z();
  Rng rng(2);
  std::vector<Vertex> pts;
  for (int i = 0; i < 64; ++i) pts.push_back(sp->sample(rng, st.range(0)));
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(sp->geodesic(pts[i % 64], pts[(i + 1) % 64]));
    ++i;
  }
}
BENCHMARK(BM_Geodesic)->Arg(30)->Arg(300);

void BM_ConedDistance(benchmark::State& st) {
  auto sp = z2z();
  RelHypGroup G(sp);
  Rng rng(3);
  std::vector<Element> pts;
  for (int i = 0; i < 64; ++i) pts.push_back(sp->element(sp->sample(rng, st.range(0))));
  std::size_t i = 0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(G.coned(pts[i % 64], pts[(i + 1) % 64]));
    ++i;
  }
}
BENCHMARK(BM_ConedDistance)->Arg(30)->Arg(300);

void BM_NearestProjection(benchmark::State& st) {
  auto sp = build_space("free_group(2)");
  PathSeg Z = build_ray(*sp, "ab", st.range(0));
  auto pi = nearest_projection(Z);
  Rng rng(4);
  for (auto _ : st) benchmark::DoNotOptimize(pi(sp->sample(rng, st.range(0) / 2)));
}
BENCHMARK(BM_NearestProjection)->Arg(256)->Arg(4096);

void BM_Walks(benchmark::State& st) {
  auto sp = z2z();
  auto mu = StepMeasure::parse(sp->group(), "uniform");
  for (auto _ : st) {
    auto paths = sample_paths(*sp, mu, st.range(0), 64, 5);
    benchmark::DoNotOptimize(walk_table(*sp, mu, paths));
  }
  st.SetItemsProcessed(st.iterations() * 64 * st.range(0));
}
BENCHMARK(BM_Walks)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
