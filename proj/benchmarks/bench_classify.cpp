#include <benchmark/benchmark.h>

#include "bench_util.hpp"
#include "extrude3d/classify.hpp"
#include "extrude3d/extrusion.hpp"

using namespace extrude3d;

namespace {

const bench::Fixture& shared_fixture() {
  static const bench::Fixture fixture = bench::make_fixture(100'000, 0.1);
  return fixture;
}

}  // namespace

static void BM_ClassifyFullMap(benchmark::State& state) {
  const auto& fixture = shared_fixture();
  for (auto _ : state) {
    const ViewVotes votes =
        collect_votes(fixture.map, fixture.label_maps, fixture.cloud.size());
    PredictedLabels predictions = aggregate_majority_vote(votes);
    benchmark::DoNotOptimize(&predictions);
  }
  state.SetItemsProcessed(state.iterations() * fixture.map.entries.size());
}
BENCHMARK(BM_ClassifyFullMap);

static void BM_ClassifyReducedMap(benchmark::State& state) {
  const auto& fixture = shared_fixture();
  const std::set<ClassId> targets = {0};
  const auto indexes = bench::make_indexes(fixture, targets);
  const PointPixelMap reduced =
      reduce_point_subspace(fixture.map, indexes, targets).reduced_map;
  for (auto _ : state) {
    const ViewVotes votes =
        collect_votes(reduced, fixture.label_maps, fixture.cloud.size());
    PredictedLabels predictions = aggregate_majority_vote(votes);
    benchmark::DoNotOptimize(&predictions);
  }
  state.SetItemsProcessed(state.iterations() * reduced.entries.size());
}
BENCHMARK(BM_ClassifyReducedMap);
