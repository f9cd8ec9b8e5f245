#include "extrude3d/scene.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

#include "extrude3d/errors.hpp"

namespace extrude3d {

void PointCloud::validate() const {
  for (const auto& p : positions) {
    if (!p.allFinite()) {
      raise(Errc::invalid_argument, "point cloud contains non-finite coordinates");
    }
  }
  if (labels && labels->size() != positions.size()) {
    raise(Errc::invalid_argument, "label count does not match point count");
  }
}

void ViewGeometry::validate() const {
  if (height < 1 || width < 1) {
    raise(Errc::invalid_argument, "image dimensions must be at least 1x1");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) {
    raise(Errc::invalid_argument, "focal lengths must be positive");
  }
  if (!(z_near > 0.0)) {
    raise(Errc::invalid_argument, "z_near must be positive");
  }
}

namespace {

bool valid_image_name(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

void CameraView::validate() const {
  geometry.validate();
  const double det_err = std::abs(rotation.determinant() - 1.0);
  const double ortho_err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (det_err > 1e-9 || ortho_err > 1e-9) {
    raise(Errc::invalid_argument,
          "camera rotation is not orthonormal within 1e-9");
  }
  if (!valid_image_name(image_name)) {
    raise(Errc::invalid_argument,
          "image_name must be non-empty [A-Za-z0-9_.-]: '" + image_name + "'");
  }
}

ContinuousProjection project_continuous(const Eigen::Vector3d& point,
                                        const CameraView& view) {
  const Eigen::Vector3d cam = view.rotation * point + view.translation;
  ContinuousProjection result;
  result.depth = cam.z();
  result.u = view.geometry.fx * cam.x() / cam.z() + view.geometry.cx;
  result.v = view.geometry.fy * cam.y() / cam.z() + view.geometry.cy;
  return result;
}

Projection project_point(const Eigen::Vector3d& point, const CameraView& view) {
  const Eigen::Vector3d cam = view.rotation * point + view.translation;
  if (cam.z() < view.geometry.z_near) return std::nullopt;
  const double u = view.geometry.fx * cam.x() / cam.z() + view.geometry.cx;
  const double v = view.geometry.fy * cam.y() / cam.z() + view.geometry.cy;
  const int col = static_cast<int>(std::floor(u));
  const int row = static_cast<int>(std::floor(v));
  if (row < 0 || row >= view.geometry.height || col < 0 ||
      col >= view.geometry.width) {
    return std::nullopt;
  }
  return VisiblePoint{PixelCoord{row, col}, cam.z()};
}

namespace {

using VoxelKey = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

VoxelKey voxel_key(const Eigen::Vector3d& p, double s) {
  return {static_cast<std::int64_t>(std::floor(p.x() / s)),
          static_cast<std::int64_t>(std::floor(p.y() / s)),
          static_cast<std::int64_t>(std::floor(p.z() / s))};
}

ClassId majority_label(const std::vector<ClassId>& labels,
                       const std::vector<PointId>& members) {
  // Histogram over the full uchar range; ties resolve to the lowest id.
  std::array<std::uint32_t, 256> counts{};
  for (PointId m : members) counts[labels[m]]++;
  int best = 0;
  for (int id = 1; id < 256; ++id) {
    if (counts[id] > counts[best]) best = id;
  }
  return static_cast<ClassId>(best);
}

}  // namespace

SubsampleResult voxel_subsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    raise(Errc::invalid_argument, "voxel_size must be positive");
  }
  if (cloud.positions.empty()) {
    raise(Errc::empty_cloud, "voxel_subsample requires a non-empty cloud");
  }

  // std::map keeps voxel keys in lexicographic order, which fixes the
  // output order independent of insertion order.
  std::map<VoxelKey, std::vector<PointId>> voxels;
  for (PointId i = 0; i < cloud.positions.size(); ++i) {
    voxels[voxel_key(cloud.positions[i], voxel_size)].push_back(i);
  }

  SubsampleResult result;
  result.cloud.positions.reserve(voxels.size());
  result.index_map.reserve(voxels.size());
  if (cloud.labels) result.cloud.labels.emplace();

  for (const auto& [key, members] : voxels) {
    const Eigen::Vector3d center{
        (static_cast<double>(std::get<0>(key)) + 0.5) * voxel_size,
        (static_cast<double>(std::get<1>(key)) + 0.5) * voxel_size,
        (static_cast<double>(std::get<2>(key)) + 0.5) * voxel_size};
    PointId representative = members.front();
    double best_dist = (cloud.positions[representative] - center).squaredNorm();
    for (std::size_t m = 1; m < members.size(); ++m) {
      const double dist = (cloud.positions[members[m]] - center).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        representative = members[m];
      }
    }
    result.cloud.positions.push_back(cloud.positions[representative]);
    result.index_map.push_back(representative);
    if (cloud.labels) {
      result.cloud.labels->push_back(majority_label(*cloud.labels, members));
    }
  }
  return result;
}

SubsampleResult cylinder_crop(const PointCloud& cloud,
                              const Eigen::Vector2d& center_xy, double radius) {
  if (!(radius > 0.0)) {
    raise(Errc::invalid_argument, "cylinder radius must be positive");
  }
  SubsampleResult result;
  if (cloud.labels) result.cloud.labels.emplace();
  const double r2 = radius * radius;
  for (PointId i = 0; i < cloud.positions.size(); ++i) {
    const double dx = cloud.positions[i].x() - center_xy.x();
    const double dy = cloud.positions[i].y() - center_xy.y();
    if (dx * dx + dy * dy <= r2) {
      result.cloud.positions.push_back(cloud.positions[i]);
      result.index_map.push_back(i);
      if (cloud.labels) result.cloud.labels->push_back((*cloud.labels)[i]);
    }
  }
  return result;
}

}  // namespace extrude3d
