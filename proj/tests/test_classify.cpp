#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "extrude3d/classify.hpp"
#include "extrude3d/errors.hpp"
#include "extrude3d/extrusion.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace extrude3d;
using extrude3d::testing::TestRng;

namespace {

std::filesystem::path temp_file(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "extrude3d_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

LabelMap uniform_map(int height, int width, ClassId value) {
  LabelMap map(height, width, value);
  return map;
}

}  // namespace

TEST_CASE("votes tally one label per visible view") {
  // Point 0 visible in three views labeled 2, 2, 5.
  PointPixelMap map;
  map.entries = {MapEntry{0, 0, PixelCoord{0, 0}, 1.0},
                 MapEntry{1, 0, PixelCoord{0, 0}, 1.0},
                 MapEntry{2, 0, PixelCoord{0, 0}, 1.0}};
  std::map<ViewId, LabelMap> labels;
  labels.emplace(0, uniform_map(2, 2, 2));
  labels.emplace(1, uniform_map(2, 2, 2));
  labels.emplace(2, uniform_map(2, 2, 5));
  const ViewVotes votes = collect_votes(map, labels, 1);
  CHECK(votes.count(0, 2) == 2);
  CHECK(votes.count(0, 5) == 1);
  CHECK(votes.total_votes(0) == 3);
}

TEST_CASE("a VOID-only pixel leaves the point unvoted") {
  PointPixelMap map;
  map.entries = {MapEntry{0, 0, PixelCoord{0, 0}, 1.0}};
  std::map<ViewId, LabelMap> labels;
  labels.emplace(0, uniform_map(2, 2, kVoidLabel));
  const ViewVotes votes = collect_votes(map, labels, 1);
  CHECK(votes.total_votes(0) == 0);
  CHECK(aggregate_majority_vote(votes).labels.empty());
}

TEST_CASE("vote totals equal the direct tally oracle") {
  TestRng rng(61);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 2'000, 4.0);
  const auto views =
      extrude3d::testing::random_rig(rng, 3, extrude3d::testing::small_geometry());
  const PointPixelMap map = build_point_pixel_map(cloud, views);
  std::map<ViewId, LabelMap> labels;
  for (const CameraView& view : views) {
    labels.emplace(view.view_id,
                   extrude3d::testing::random_label_map(
                       rng, view.geometry.height, view.geometry.width));
  }
  const ViewVotes votes = collect_votes(map, labels, cloud.size());
  const auto expected = extrude3d::testing::oracle_vote_counts(map, labels);
  for (PointId point = 0; point < cloud.size(); ++point) {
    const auto it = expected.find(point);
    for (ClassId c = 0; c < kNumClasses; ++c) {
      const std::uint32_t want =
          it == expected.end() || !it->second.count(c) ? 0 : it->second.at(c);
      CHECK(votes.count(point, c) == want);
    }
  }
}

TEST_CASE("missing label maps are a geometry mismatch") {
  PointPixelMap map;
  map.entries = {MapEntry{0, 0, PixelCoord{0, 0}, 1.0}};
  CHECK_THROWS_WITH_AS(collect_votes(map, {}, 1),
                       doctest::Contains("GeometryMismatch"), Error);
}

TEST_CASE("majority vote picks the highest count") {
  ViewVotes votes(1);
  for (int i = 0; i < 3; ++i) votes.add_vote(0, 2);
  votes.add_vote(0, 5);
  const PredictedLabels predictions = aggregate_majority_vote(votes);
  CHECK(predictions.labels.at(0) == 2);
}

TEST_CASE("vote ties resolve to the lowest class id") {
  ViewVotes votes(1);
  votes.add_vote(0, 1);
  votes.add_vote(0, 1);
  votes.add_vote(0, 3);
  votes.add_vote(0, 3);
  CHECK(aggregate_majority_vote(votes).labels.at(0) == 1);
}

TEST_CASE("argmax equals a brute-force max scan") {
  TestRng rng(62);
  ViewVotes votes(500);
  for (PointId point = 0; point < 500; ++point) {
    const int n = static_cast<int>(rng.uniform_int(0, 12));
    for (int i = 0; i < n; ++i) votes.add_vote(point, rng.taxonomy_id());
  }
  const PredictedLabels predictions = aggregate_majority_vote(votes);
  for (PointId point = 0; point < 500; ++point) {
    if (votes.total_votes(point) == 0) {
      CHECK(predictions.labels.count(point) == 0);
      continue;
    }
    ClassId best = 0;
    for (ClassId c = 0; c < kNumClasses; ++c) {
      if (votes.count(point, c) > votes.count(point, best)) best = c;
    }
    CHECK(predictions.labels.at(point) == best);
  }
}

TEST_CASE("argmax is invariant under scaling all counts") {
  TestRng rng(63);
  for (int round = 0; round < 50; ++round) {
    ViewVotes votes(1), scaled(1);
    const int factor = static_cast<int>(rng.uniform_int(2, 5));
    for (ClassId c = 0; c < kNumClasses; ++c) {
      const int n = static_cast<int>(rng.uniform_int(0, 4));
      for (int i = 0; i < n; ++i) votes.add_vote(0, c);
      for (int i = 0; i < n * factor; ++i) scaled.add_vote(0, c);
    }
    const auto base = aggregate_majority_vote(votes).labels;
    const auto more = aggregate_majority_vote(scaled).labels;
    CHECK(base == more);
  }
}

TEST_CASE("noiseless ground-truth votes reproduce every label") {
  TestRng rng(64);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 3'000, 4.0);
  const auto views =
      extrude3d::testing::random_rig(rng, 3, extrude3d::testing::small_geometry());
  const PointPixelMap map = build_point_pixel_map(cloud, views);
  std::map<ViewId, LabelMap> labels;
  for (const CameraView& view : views) {
    labels.emplace(view.view_id,
                   render_ground_truth_labels(cloud, view, map));
  }
  const PredictedLabels predictions =
      aggregate_majority_vote(collect_votes(map, labels, cloud.size()));
  for (const auto& [point, predicted] : predictions.labels) {
    CHECK(predicted == (*cloud.labels)[point]);
  }
  // Every visible point voted.
  CHECK(predictions.labels.size() == visible_points_any_view(map).size());
}

TEST_CASE("reduced-map votes only carry target classes under shared labels") {
  TestRng rng(65);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 2'000, 4.0);
  const auto views =
      extrude3d::testing::random_rig(rng, 2, extrude3d::testing::small_geometry());
  const PointPixelMap map = build_point_pixel_map(cloud, views);
  std::map<ViewId, LabelMap> labels;
  std::map<ViewId, ClassPixelIndex> indexes;
  const std::set<ClassId> targets = {2, 7};
  for (const CameraView& view : views) {
    LabelMap rendered = render_ground_truth_labels(cloud, view, map);
    indexes.emplace(view.view_id,
                    extract_class_pixels(rendered, targets, view.image_name));
    labels.emplace(view.view_id, std::move(rendered));
  }
  const ReductionResult reduced = reduce_point_subspace(map, indexes, targets);
  const ViewVotes votes =
      collect_votes(reduced.reduced_map, labels, cloud.size());
  for (PointId point : reduced.retained_point_ids) {
    CHECK(votes.total_votes(point) > 0);
    for (ClassId c = 0; c < kNumClasses; ++c) {
      if (votes.count(point, c) > 0) CHECK(targets.count(c) == 1);
    }
  }
}

TEST_CASE("external predictions parse and validate") {
  const auto path = temp_file("preds.txt");
  {
    std::ofstream out(path);
    out << "0 11\n3 0\n";
  }
  const PredictedLabels predictions = load_external_predictions(path, 5);
  CHECK(predictions.source == PredictionSource::external);
  CHECK(predictions.labels.at(0) == 11);
  CHECK(predictions.labels.at(3) == 0);
  CHECK(predictions.labels.size() == 2);
}

TEST_CASE("external predictions reject bad records") {
  const auto path = temp_file("bad_preds.txt");
  const auto write = [&](const char* body) {
    std::ofstream out(path);
    out << body;
  };

  write("9 0\n");
  CHECK_THROWS_WITH_AS(load_external_predictions(path, 5),
                       doctest::Contains("OutOfRangePointId"), Error);

  write("0 99\n");
  CHECK_THROWS_WITH_AS(load_external_predictions(path, 5),
                       doctest::Contains("UnknownClassId"), Error);

  write("0 1\n0 2\n");
  CHECK_THROWS_WITH_AS(load_external_predictions(path, 5),
                       doctest::Contains("DuplicatePointId"), Error);

  write("zero 1\n");
  CHECK_THROWS_WITH_AS(load_external_predictions(path, 5),
                       doctest::Contains("MalformedPrediction"), Error);
}

TEST_CASE("prediction files round trip") {
  TestRng rng(66);
  PredictedLabels predictions;
  for (int i = 0; i < 200; ++i) {
    predictions.labels.emplace(static_cast<PointId>(rng.uniform_int(0, 9999)),
                               rng.taxonomy_id());
  }
  const auto path = temp_file("roundtrip_preds.txt");
  write_predictions(predictions, path);
  const PredictedLabels loaded = load_external_predictions(path, 10'000);
  CHECK(loaded.labels == predictions.labels);
}
