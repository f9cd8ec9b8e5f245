#include <benchmark/benchmark.h>

#include "bench_util.hpp"
#include "extrude3d/mapping.hpp"

using namespace extrude3d;

static void BM_BuildPointPixelMap(benchmark::State& state) {
  const auto fixture =
      bench::make_fixture(static_cast<std::size_t>(state.range(0)), 0.5);
  for (auto _ : state) {
    PointPixelMap map = build_point_pixel_map(fixture.cloud, fixture.views);
    benchmark::DoNotOptimize(map.entries.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildPointPixelMap)->Arg(10'000)->Arg(50'000)->Arg(100'000);

static void BM_BuildPointPixelMapThreaded(benchmark::State& state) {
  // Four views so the per-view parallelism has work to split.
  auto fixture = bench::make_fixture(50'000, 0.5, 256);
  std::vector<CameraView> views;
  for (int v = 0; v < 4; ++v) {
    CameraView view = fixture.views[0];
    view.view_id = static_cast<ViewId>(v);
    view.image_name = "top" + std::to_string(v);
    views.push_back(view);
  }
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    PointPixelMap map =
        build_point_pixel_map(fixture.cloud, views, 1e-6, threads);
    benchmark::DoNotOptimize(map.entries.data());
  }
}
BENCHMARK(BM_BuildPointPixelMapThreaded)->Arg(1)->Arg(2)->Arg(4);
