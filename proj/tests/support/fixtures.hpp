#pragma once

// Seeded random builders for test inputs. mt19937_64 has a
// standard-mandated sequence, so fixtures reproduce everywhere.

#include <random>
#include <set>
#include <vector>

#include "extrude3d/labels.hpp"
#include "extrude3d/scene.hpp"
#include "extrude3d/synth.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d::testing {

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double t =
        static_cast<double>(engine_() >> 11) * 0x1.0p-53;  // [0, 1)
    return lo + t * (hi - lo);
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {  // inclusive
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  ClassId taxonomy_id() {
    return static_cast<ClassId>(uniform_int(0, kNumClasses - 1));
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline PointCloud random_cloud(TestRng& rng, std::size_t count,
                               double extent = 5.0, bool labeled = true) {
  PointCloud cloud;
  cloud.positions.reserve(count);
  if (labeled) cloud.labels.emplace();
  for (std::size_t i = 0; i < count; ++i) {
    cloud.positions.emplace_back(rng.uniform(-extent, extent),
                                 rng.uniform(-extent, extent),
                                 rng.uniform(-extent, extent));
    if (labeled) cloud.labels->push_back(rng.taxonomy_id());
  }
  return cloud;
}

inline ViewGeometry small_geometry(int height = 48, int width = 64) {
  ViewGeometry geometry;
  geometry.height = height;
  geometry.width = width;
  geometry.fx = 60.0;
  geometry.fy = 60.0;
  geometry.cx = width / 2.0;
  geometry.cy = height / 2.0;
  return geometry;
}

/// Camera on a sphere around the origin, looking inward; every cloud point
/// near the origin is in front of it.
inline CameraView random_camera(TestRng& rng, ViewId view_id,
                                const ViewGeometry& geometry,
                                double distance = 14.0) {
  const double azimuth = rng.uniform(0.0, 6.28318);
  const double elevation = rng.uniform(-0.7, 0.7);
  const Eigen::Vector3d position(distance * std::cos(elevation) * std::cos(azimuth),
                                 distance * std::cos(elevation) * std::sin(azimuth),
                                 distance * std::sin(elevation));
  const Eigen::Vector3d target(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                               rng.uniform(-1.0, 1.0));
  return make_look_at_camera(view_id, "view" + std::to_string(view_id),
                             geometry, position, target);
}

inline std::vector<CameraView> random_rig(TestRng& rng, std::size_t count,
                                          const ViewGeometry& geometry) {
  std::vector<CameraView> views;
  for (std::size_t v = 0; v < count; ++v) {
    views.push_back(random_camera(rng, static_cast<ViewId>(v), geometry));
  }
  return views;
}

inline LabelMap random_label_map(TestRng& rng, int height, int width,
                                 double void_fraction = 0.2) {
  LabelMap map(height, width);
  for (auto& value : map.values) {
    value = rng.uniform(0.0, 1.0) < void_fraction ? kVoidLabel
                                                  : rng.taxonomy_id();
  }
  return map;
}

inline std::set<ClassId> random_targets(TestRng& rng, std::size_t max_count = 4) {
  std::set<ClassId> targets;
  const auto count = static_cast<std::size_t>(rng.uniform_int(1, max_count));
  while (targets.size() < count) targets.insert(rng.taxonomy_id());
  return targets;
}

}  // namespace extrude3d::testing
