#include <benchmark/benchmark.h>

#include "bench_util.hpp"
#include "extrude3d/extrusion.hpp"

using namespace extrude3d;

namespace {

/// Reference membership test as a per-entry linear scan over the pixel
/// lists, the cost the hashed per-view set avoids.
std::size_t reduce_with_linear_scan(const PointPixelMap& map,
                                    const std::map<ViewId, ClassPixelIndex>& indexes,
                                    const std::set<ClassId>& targets) {
  std::size_t kept = 0;
  for (const MapEntry& entry : map.entries) {
    const auto it = indexes.find(entry.view_id);
    if (it == indexes.end()) continue;
    for (ClassId target : targets) {
      const auto list = it->second.pixels_by_class.find(target);
      if (list == it->second.pixels_by_class.end()) continue;
      bool hit = false;
      for (const PixelCoord& pixel : list->second) {
        if (pixel == entry.pixel) {
          hit = true;
          break;
        }
      }
      if (hit) {
        ++kept;
        break;
      }
    }
  }
  return kept;
}

}  // namespace

static void BM_ReduceHashedMembership(benchmark::State& state) {
  const auto fixture =
      bench::make_fixture(static_cast<std::size_t>(state.range(0)), 0.3);
  const std::set<ClassId> targets = {0};
  const auto indexes = bench::make_indexes(fixture, targets);
  for (auto _ : state) {
    ReductionResult result = reduce_point_subspace(fixture.map, indexes, targets);
    benchmark::DoNotOptimize(result.retained_point_ids.data());
  }
  state.SetItemsProcessed(state.iterations() * fixture.map.entries.size());
}
BENCHMARK(BM_ReduceHashedMembership)->Arg(10'000)->Arg(50'000)->Arg(100'000);

static void BM_ReduceLinearScanBaseline(benchmark::State& state) {
  const auto fixture =
      bench::make_fixture(static_cast<std::size_t>(state.range(0)), 0.3);
  const std::set<ClassId> targets = {0};
  const auto indexes = bench::make_indexes(fixture, targets);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        reduce_with_linear_scan(fixture.map, indexes, targets));
  }
  state.SetItemsProcessed(state.iterations() * fixture.map.entries.size());
}
BENCHMARK(BM_ReduceLinearScanBaseline)->Arg(10'000);

static void BM_ExtractClassPixels(benchmark::State& state) {
  const auto fixture = bench::make_fixture(100'000, 0.3);
  const std::set<ClassId> targets = {0, 1};
  const LabelMap& map = fixture.label_maps.at(0);
  for (auto _ : state) {
    ClassPixelIndex index = extract_class_pixels(map, targets, "top");
    benchmark::DoNotOptimize(&index);
  }
}
BENCHMARK(BM_ExtractClassPixels);
