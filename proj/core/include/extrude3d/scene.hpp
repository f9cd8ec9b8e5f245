#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "extrude3d/types.hpp"

namespace extrude3d {

/// Ordered set of 3D points in the world frame, optionally labeled.
/// The index of a point is its identity everywhere else in the pipeline.
struct PointCloud {
  std::vector<Eigen::Vector3d> positions;
  std::optional<std::vector<ClassId>> labels;

  std::size_t size() const { return positions.size(); }
  bool has_labels() const { return labels.has_value(); }

  /// Checks coordinate finiteness and label/position length agreement.
  void validate() const;
};

/// Pinhole image geometry. z_near is the minimum visible camera depth.
struct ViewGeometry {
  int height = 0;
  int width = 0;
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double z_near = 0.01;

  void validate() const;
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
};

/// World-to-camera pose plus image geometry. The camera looks down +z with
/// x right and y down, so v follows rows and u follows columns.
struct CameraView {
  ViewGeometry geometry;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  ViewId view_id = 0;
  std::string image_name;

  /// Checks geometry, rotation orthonormality (1e-9) and the image name.
  void validate() const;
};

/// Integer pixel index; pixel (r, c) covers [r, r+1) x [c, c+1) in
/// continuous image coordinates.
struct PixelCoord {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

struct VisiblePoint {
  PixelCoord pixel;
  double depth = 0.0;  // camera-frame z in meters
};

/// Projection outcome: engaged when the point is in front of z_near and its
/// pixel lands inside the image.
using Projection = std::optional<VisiblePoint>;

/// Continuous pinhole image coordinates (u along columns, v along rows)
/// paired with camera depth; not bounds-checked. Exposed for tests of the
/// projection formula itself.
struct ContinuousProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

ContinuousProjection project_continuous(const Eigen::Vector3d& point,
                                        const CameraView& view);

Projection project_point(const Eigen::Vector3d& point, const CameraView& view);

struct SubsampleResult {
  PointCloud cloud;
  std::vector<PointId> index_map;  // output index -> original index
};

/// One representative per occupied voxel of side voxel_size: the member
/// nearest the voxel center (ties by lowest original index). Labels become
/// the voxel majority (ties by lowest ClassId). Output follows lexicographic
/// (kx, ky, kz) voxel-key order.
SubsampleResult voxel_subsample(const PointCloud& cloud, double voxel_size);

/// Keeps the points inside the vertical cylinder (x-cx)^2 + (y-cy)^2 <= r^2,
/// preserving the original order.
SubsampleResult cylinder_crop(const PointCloud& cloud,
                              const Eigen::Vector2d& center_xy, double radius);

// --- File formats ------------------------------------------------------

/// Reads the ASCII PLY subset: `format ascii 1.0`, a single vertex element
/// with float x/y/z and an optional uchar label. Unknown properties or
/// elements are rejected.
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

/// Camera calibration table, one view per line:
/// view_id image_name height width fx fy cx cy r00..r22 tx ty tz
std::vector<CameraView> read_camera_file(const std::filesystem::path& path,
                                         double z_near = 0.01);
void write_camera_file(const std::vector<CameraView>& views,
                       const std::filesystem::path& path);

}  // namespace extrude3d
