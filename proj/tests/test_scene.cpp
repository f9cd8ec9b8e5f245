#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <tuple>

#include "extrude3d/errors.hpp"
#include "extrude3d/scene.hpp"
#include "support/fixtures.hpp"

using namespace extrude3d;
using extrude3d::testing::TestRng;

namespace {

CameraView identity_camera(int height, int width, double fx, double fy,
                           double cx, double cy) {
  CameraView view;
  view.geometry.height = height;
  view.geometry.width = width;
  view.geometry.fx = fx;
  view.geometry.fy = fy;
  view.geometry.cx = cx;
  view.geometry.cy = cy;
  view.image_name = "cam";
  return view;
}

std::filesystem::path temp_file(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "extrude3d_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("project_point maps the optical axis to the principal pixel") {
  const CameraView view = identity_camera(48, 64, 100, 100, 32.5, 24.5);
  const Projection p = project_point({0.0, 0.0, 2.0}, view);
  REQUIRE(p.has_value());
  CHECK(p->pixel.row == 24);
  CHECK(p->pixel.col == 32);
  CHECK(p->depth == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("project_point rejects points behind the camera") {
  const CameraView view = identity_camera(48, 64, 100, 100, 32.5, 24.5);
  CHECK_FALSE(project_point({0.0, 0.0, -1.0}, view).has_value());
}

TEST_CASE("project_point evaluates the pinhole formula") {
  // u = 100 * 1 / 2 + 32.5 = 82.5, v = 24.5.
  const CameraView narrow = identity_camera(48, 64, 100, 100, 32.5, 24.5);
  const ContinuousProjection continuous =
      project_continuous({1.0, 0.0, 2.0}, narrow);
  CHECK(continuous.u == doctest::Approx(82.5).epsilon(1e-12));
  CHECK(continuous.v == doctest::Approx(24.5).epsilon(1e-12));
  CHECK(continuous.depth == doctest::Approx(2.0).epsilon(1e-12));

  // col 82 is outside a 64-wide image but inside a 96-wide one.
  CHECK_FALSE(project_point({1.0, 0.0, 2.0}, narrow).has_value());
  const CameraView wide = identity_camera(48, 96, 100, 100, 32.5, 24.5);
  const Projection p = project_point({1.0, 0.0, 2.0}, wide);
  REQUIRE(p.has_value());
  CHECK(p->pixel.row == 24);
  CHECK(p->pixel.col == 82);
}

TEST_CASE("projection is scale-consistent along camera rays") {
  TestRng rng(11);
  const CameraView view = identity_camera(48, 64, 60, 55, 31.0, 23.0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d p(rng.uniform(-3, 3), rng.uniform(-3, 3),
                            rng.uniform(0.5, 5.0));
    const double lambda = rng.uniform(1.1, 4.0);
    const ContinuousProjection a = project_continuous(p, view);
    const ContinuousProjection b = project_continuous(lambda * p, view);
    CHECK(a.u == doctest::Approx(b.u).epsilon(1e-9));
    CHECK(a.v == doctest::Approx(b.v).epsilon(1e-9));
  }
}

TEST_CASE("points nearer than z_near are not visible") {
  CameraView view = identity_camera(48, 64, 100, 100, 32.0, 24.0);
  view.geometry.z_near = 0.5;
  CHECK_FALSE(project_point({0.0, 0.0, 0.4}, view).has_value());
  CHECK(project_point({0.0, 0.0, 0.6}, view).has_value());
}

TEST_CASE("voxel_subsample merges points sharing a voxel") {
  PointCloud cloud;
  cloud.positions = {{0.0, 0.0, 0.0}, {0.01, 0.0, 0.0}};
  const SubsampleResult result = voxel_subsample(cloud, 0.05);
  CHECK(result.cloud.size() == 1);
}

TEST_CASE("voxel_subsample keeps points in distinct voxels") {
  PointCloud cloud;
  cloud.positions = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
  const SubsampleResult result = voxel_subsample(cloud, 0.05);
  CHECK(result.cloud.size() == 2);
}

TEST_CASE("voxel_subsample representative count equals distinct voxel keys") {
  TestRng rng(21);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 10'000, 2.0);
  const double s = 0.05;
  // Independent hash-grid key enumeration.
  std::set<std::tuple<long long, long long, long long>> keys;
  for (const auto& p : cloud.positions) {
    keys.insert({static_cast<long long>(std::floor(p.x() / s)),
                 static_cast<long long>(std::floor(p.y() / s)),
                 static_cast<long long>(std::floor(p.z() / s))});
  }
  const SubsampleResult result = voxel_subsample(cloud, s);
  CHECK(result.cloud.size() == keys.size());
}

TEST_CASE("voxel_subsample picks the member nearest the voxel center") {
  PointCloud cloud;
  // Voxel [0, 0.05)^3, center (0.025, 0.025, 0.025).
  cloud.positions = {{0.001, 0.001, 0.001}, {0.024, 0.026, 0.025}};
  cloud.labels = std::vector<ClassId>{3, 7};
  const SubsampleResult result = voxel_subsample(cloud, 0.05);
  REQUIRE(result.cloud.size() == 1);
  CHECK(result.index_map[0] == 1);
  // Majority label tie (one vote each) resolves to the lowest id.
  CHECK((*result.cloud.labels)[0] == 3);
}

TEST_CASE("re-subsampling with the same size is the identity") {
  TestRng rng(22);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 2'000, 1.0);
  const SubsampleResult once = voxel_subsample(cloud, 0.05);
  const SubsampleResult twice = voxel_subsample(once.cloud, 0.05);
  REQUIRE(twice.cloud.size() == once.cloud.size());
  for (std::size_t i = 0; i < twice.cloud.size(); ++i) {
    CHECK(twice.index_map[i] == i);
    CHECK(twice.cloud.positions[i] == once.cloud.positions[i]);
  }
}

TEST_CASE("voxel_subsample rejects empty clouds") {
  PointCloud cloud;
  CHECK_THROWS_WITH_AS(voxel_subsample(cloud, 0.05), doctest::Contains("EmptyCloud"),
                       Error);
}

TEST_CASE("cylinder_crop boundary behavior") {
  PointCloud cloud;
  const double radius = 1.0;
  cloud.positions = {{radius - 1e-6, 0.0, 5.0}, {radius + 1e-6, 0.0, -5.0}};
  const SubsampleResult result = cylinder_crop(cloud, {0.0, 0.0}, radius);
  REQUIRE(result.cloud.size() == 1);
  CHECK(result.index_map[0] == 0);
}

TEST_CASE("cylinder_crop equals the per-point filter oracle") {
  TestRng rng(23);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 5'000, 4.0);
  const Eigen::Vector2d center(0.5, -0.25);
  const double radius = 2.0;
  std::vector<PointId> expected;
  for (PointId i = 0; i < cloud.size(); ++i) {
    const double dx = cloud.positions[i].x() - center.x();
    const double dy = cloud.positions[i].y() - center.y();
    if (dx * dx + dy * dy <= radius * radius) expected.push_back(i);
  }
  const SubsampleResult result = cylinder_crop(cloud, center, radius);
  CHECK(result.index_map == expected);
}

TEST_CASE("cylinder_crop is monotone in the radius") {
  TestRng rng(24);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 1'000, 3.0);
  const Eigen::Vector2d center(0.0, 0.0);
  const auto small = cylinder_crop(cloud, center, 1.0).index_map;
  const auto large = cylinder_crop(cloud, center, 2.5).index_map;
  const std::set<PointId> large_set(large.begin(), large.end());
  for (PointId id : small) CHECK(large_set.count(id) == 1);
}

TEST_CASE("index maps are valid and duplicate-free") {
  TestRng rng(25);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 3'000, 2.0);
  for (const auto& result :
       {voxel_subsample(cloud, 0.07), cylinder_crop(cloud, {0, 0}, 1.5)}) {
    std::set<PointId> seen;
    for (PointId id : result.index_map) {
      CHECK(id < cloud.size());
      CHECK(seen.insert(id).second);
    }
  }
}

TEST_CASE("PLY round trip preserves positions and labels") {
  TestRng rng(26);
  const PointCloud cloud = extrude3d::testing::random_cloud(rng, 500, 10.0);
  const auto path = temp_file("roundtrip.ply");
  write_ply(cloud, path);
  const PointCloud loaded = read_ply(path);
  REQUIRE(loaded.size() == cloud.size());
  CHECK(loaded.positions == cloud.positions);
  CHECK(*loaded.labels == *cloud.labels);
}

TEST_CASE("PLY reader rejects unknown properties") {
  const auto path = temp_file("extra_property.ply");
  std::ofstream out(path);
  out << "ply\nformat ascii 1.0\nelement vertex 1\n"
         "property float x\nproperty float y\nproperty float z\n"
         "property float intensity\nend_header\n0 0 0 1\n";
  out.close();
  CHECK_THROWS_AS(read_ply(path), Error);
}

TEST_CASE("PLY reader rejects binary format declarations") {
  const auto path = temp_file("binary.ply");
  std::ofstream out(path);
  out << "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
  out.close();
  CHECK_THROWS_WITH_AS(read_ply(path), doctest::Contains("BadMagic"), Error);
}

TEST_CASE("PLY reader reports truncated vertex data") {
  const auto path = temp_file("truncated.ply");
  std::ofstream out(path);
  out << "ply\nformat ascii 1.0\nelement vertex 2\n"
         "property float x\nproperty float y\nproperty float z\nend_header\n"
         "0 0 0\n";
  out.close();
  CHECK_THROWS_WITH_AS(read_ply(path), doctest::Contains("TruncatedData"), Error);
}

TEST_CASE("camera calibration file round trips") {
  TestRng rng(27);
  const auto views =
      extrude3d::testing::random_rig(rng, 3, extrude3d::testing::small_geometry());
  const auto path = temp_file("cameras.txt");
  write_camera_file(views, path);
  const auto loaded = read_camera_file(path);
  REQUIRE(loaded.size() == views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    CHECK(loaded[v].view_id == views[v].view_id);
    CHECK(loaded[v].image_name == views[v].image_name);
    CHECK(loaded[v].rotation == views[v].rotation);
    CHECK(loaded[v].translation == views[v].translation);
    CHECK(loaded[v].geometry.fx == views[v].geometry.fx);
  }
}

TEST_CASE("camera file rejects duplicate view ids") {
  TestRng rng(28);
  auto views =
      extrude3d::testing::random_rig(rng, 2, extrude3d::testing::small_geometry());
  views[1].view_id = views[0].view_id;
  const auto path = temp_file("dup_cameras.txt");
  write_camera_file(views, path);
  CHECK_THROWS_WITH_AS(read_camera_file(path), doctest::Contains("DuplicateViewId"),
                       Error);
}

TEST_CASE("camera validation enforces orthonormality") {
  CameraView view = identity_camera(10, 10, 5, 5, 5, 5);
  view.rotation(0, 0) = 1.0 + 1e-6;
  CHECK_THROWS_AS(view.validate(), Error);
}
