#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "extrude3d/errors.hpp"
#include "extrude3d/labels.hpp"
#include "extrude3d/mapping.hpp"
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

}  // namespace

TEST_CASE("P2 label maps parse to the written values") {
  const auto path = temp_file("tiny.pgm");
  std::ofstream out(path);
  out << "P2\n2 2\n255\n1 1\n2 0\n";
  out.close();
  const LabelMap map = load_label_map(path);
  CHECK(map.height == 2);
  CHECK(map.width == 2);
  CHECK(map.at(0, 0) == 1);
  CHECK(map.at(0, 1) == 1);
  CHECK(map.at(1, 0) == 2);
  CHECK(map.at(1, 1) == 0);
}

TEST_CASE("P6 magic is rejected") {
  const auto path = temp_file("p6.pgm");
  std::ofstream out(path);
  out << "P6\n2 2\n255\n";
  out.close();
  CHECK_THROWS_WITH_AS(load_label_map(path), doctest::Contains("BadMagic"), Error);
}

TEST_CASE("non-255 maxval is rejected") {
  const auto path = temp_file("maxval.pgm");
  std::ofstream out(path);
  out << "P2\n1 1\n15\n3\n";
  out.close();
  CHECK_THROWS_WITH_AS(load_label_map(path), doctest::Contains("BadDimensions"),
                       Error);
}

TEST_CASE("truncated P5 payload is rejected") {
  const auto path = temp_file("short.pgm");
  std::ofstream out(path, std::ios::binary);
  out << "P5\n4 4\n255\n";
  out.write("\x01\x02", 2);
  out.close();
  CHECK_THROWS_WITH_AS(load_label_map(path), doctest::Contains("TruncatedData"),
                       Error);
}

TEST_CASE("PGM round trip is the identity in both formats") {
  TestRng rng(41);
  const LabelMap map = extrude3d::testing::random_label_map(rng, 37, 53);
  for (const PgmFormat format : {PgmFormat::binary_p5, PgmFormat::ascii_p2}) {
    const auto path = temp_file("roundtrip.pgm");
    write_label_map(map, path, format);
    CHECK(load_label_map(path) == map);
  }
}

TEST_CASE("PGM header comments are skipped") {
  const auto path = temp_file("comment.pgm");
  std::ofstream out(path);
  out << "P2\n# produced by a tool\n2 1\n255\n5 255\n";
  out.close();
  const LabelMap map = load_label_map(path);
  CHECK(map.at(0, 0) == 5);
  CHECK(map.at(0, 1) == kVoidLabel);
}

TEST_CASE("out-of-taxonomy label values are rejected") {
  const auto path = temp_file("badvalue.pgm");
  std::ofstream out(path);
  out << "P2\n1 1\n255\n200\n";
  out.close();
  CHECK_THROWS_WITH_AS(load_label_map(path), doctest::Contains("UnknownClassId"),
                       Error);
}

TEST_CASE("rendering paints the winning point's label") {
  PointCloud cloud;
  cloud.positions = {{0.0, 0.0, 2.0}};
  cloud.labels = std::vector<ClassId>{11};
  CameraView view;
  view.geometry.height = 48;
  view.geometry.width = 64;
  view.geometry.fx = view.geometry.fy = 100.0;
  view.geometry.cx = 32.5;
  view.geometry.cy = 24.5;
  view.image_name = "cam";
  const PointPixelMap map = build_point_pixel_map(cloud, {view});
  const LabelMap rendered = render_ground_truth_labels(cloud, view, map);
  for (int r = 0; r < rendered.height; ++r) {
    for (int c = 0; c < rendered.width; ++c) {
      if (r == 24 && c == 32) {
        CHECK(rendered.at(r, c) == 11);
      } else {
        CHECK(rendered.at(r, c) == kVoidLabel);
      }
    }
  }
}

TEST_CASE("rendering an empty cloud yields an all-VOID map") {
  PointCloud cloud;
  cloud.labels = std::vector<ClassId>{};
  CameraView view;
  view.geometry = extrude3d::testing::small_geometry();
  view.image_name = "cam";
  const PointPixelMap map = build_point_pixel_map(cloud, {view});
  const LabelMap rendered = render_ground_truth_labels(cloud, view, map);
  for (ClassId value : rendered.values) CHECK(value == kVoidLabel);
}

TEST_CASE("rendering requires labels") {
  PointCloud cloud;
  cloud.positions = {{0.0, 0.0, 2.0}};
  CameraView view;
  view.geometry = extrude3d::testing::small_geometry();
  view.image_name = "cam";
  const PointPixelMap map = build_point_pixel_map(cloud, {view});
  CHECK_THROWS_WITH_AS(render_ground_truth_labels(cloud, view, map),
                       doctest::Contains("MissingLabels"), Error);
}

TEST_CASE("rendered labels agree with the map entries") {
  TestRng rng(42);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 3'000, 4.0);
  const auto views =
      extrude3d::testing::random_rig(rng, 2, extrude3d::testing::small_geometry());
  const PointPixelMap map = build_point_pixel_map(cloud, views);
  for (const CameraView& view : views) {
    const LabelMap rendered = render_ground_truth_labels(cloud, view, map);
    std::size_t checked = 0;
    for (const MapEntry& e : map.entries) {
      if (e.view_id != view.view_id) continue;
      CHECK(rendered.at(e.pixel) == (*cloud.labels)[e.point_id]);
      ++checked;
    }
    CHECK(checked > 0);
  }
}

TEST_CASE("noise with flip_rate 0 is the identity") {
  TestRng rng(43);
  const LabelMap map = extrude3d::testing::random_label_map(rng, 32, 32);
  CHECK(inject_label_noise(map, 0.0, 7) == map);
}

TEST_CASE("noise with flip_rate 1 changes every non-VOID pixel") {
  TestRng rng(44);
  const LabelMap map = extrude3d::testing::random_label_map(rng, 32, 32);
  const LabelMap noisy = inject_label_noise(map, 1.0, 7);
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (map.values[i] == kVoidLabel) {
      CHECK(noisy.values[i] == kVoidLabel);
    } else {
      CHECK(noisy.values[i] != map.values[i]);
      CHECK(is_taxonomy_id(noisy.values[i]));
    }
  }
}

TEST_CASE("noise flip fraction concentrates around the rate") {
  TestRng rng(45);
  // 100k non-VOID pixels.
  const LabelMap map = extrude3d::testing::random_label_map(rng, 250, 400, 0.0);
  const LabelMap noisy = inject_label_noise(map, 0.2, 99);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (noisy.values[i] != map.values[i]) ++flips;
  }
  const double fraction = static_cast<double>(flips) / map.values.size();
  CHECK(fraction >= 0.19);
  CHECK(fraction <= 0.21);
}

TEST_CASE("noise is deterministic in the seed") {
  TestRng rng(46);
  const LabelMap map = extrude3d::testing::random_label_map(rng, 40, 40);
  CHECK(inject_label_noise(map, 0.3, 5) == inject_label_noise(map, 0.3, 5));
  CHECK(inject_label_noise(map, 0.3, 5) != inject_label_noise(map, 0.3, 6));
}
