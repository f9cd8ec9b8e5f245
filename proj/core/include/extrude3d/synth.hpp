#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "extrude3d/scene.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

enum class PrimitiveShape { plane, box, cylinder, sphere };

/// One surface primitive to sample points from. `size` is interpreted per
/// shape: plane {width, depth}, box {sx, sy, sz}, cylinder {radius, height}
/// (lateral surface), sphere {radius}. Pose = center offset + yaw about z.
struct PrimitiveSpec {
  PrimitiveShape shape = PrimitiveShape::plane;
  ClassId class_id = 0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double yaw = 0.0;          // radians
  std::vector<double> size;  // shape-dependent, see above
  double density = 0.0;      // surface points per square meter

  double surface_area() const;
  std::size_t point_count() const;  // round(area * density)
  void validate() const;
};

/// Look-at camera description; the world-to-camera rotation is derived when
/// the scene is generated.
struct CameraSpec {
  ViewId view_id = 0;
  std::string image_name;
  ViewGeometry geometry;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  Eigen::Vector3d up = Eigen::Vector3d(0.0, 0.0, 1.0);
};

struct SceneSpec {
  std::uint64_t seed = 0;
  Eigen::Vector3d extent = Eigen::Vector3d(20.0, 20.0, 8.0);
  std::size_t point_cap = 5'000'000;
  std::vector<PrimitiveSpec> objects;
  std::vector<CameraSpec> cameras;

  void validate() const;
};

/// World-to-camera pose looking from `position` toward `target`; x right,
/// y down, z forward. `up` fixes the roll (default world +z).
CameraView make_look_at_camera(ViewId view_id, const std::string& image_name,
                               const ViewGeometry& geometry,
                               const Eigen::Vector3d& position,
                               const Eigen::Vector3d& target,
                               const Eigen::Vector3d& up = {0.0, 0.0, 1.0});

struct GeneratedScene {
  PointCloud cloud;  // labeled
  std::vector<CameraView> views;
};

/// Samples each primitive's surface uniformly at its density with a
/// counter-based generator keyed by (seed, object index, point index);
/// identical specs produce byte-identical output on every platform and
/// thread count.
GeneratedScene generate_scene(const SceneSpec& spec);

/// Fraction of labeled points whose class belongs to `targets`.
double class_fraction(const PointCloud& cloud, const std::set<ClassId>& targets);

/// Text scene description; see the README for the schema.
SceneSpec read_scene_spec(const std::filesystem::path& path);
void write_scene_spec(const SceneSpec& spec, const std::filesystem::path& path);

/// Small street-like scene with two cameras, used by the quickstart.
SceneSpec demo_scene_spec();

}  // namespace extrude3d
