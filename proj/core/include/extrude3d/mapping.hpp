#pragma once

#include <filesystem>
#include <vector>

#include "extrude3d/scene.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

/// One visible (view, point, pixel, depth) correspondence; a Z-buffer winner.
struct MapEntry {
  ViewId view_id = 0;
  PointId point_id = 0;
  PixelCoord pixel;
  double depth = 0.0;

  friend bool operator==(const MapEntry&, const MapEntry&) = default;
};

/// All visible point<->pixel pairs, sorted by (view_id, pixel.row, pixel.col).
/// At most one entry exists per (view_id, pixel); a point appears at most
/// once per view but may be visible in several views.
struct PointPixelMap {
  std::vector<MapEntry> entries;

  /// Entries of one view as a subrange [begin, end) of `entries`.
  std::pair<std::size_t, std::size_t> view_range(ViewId view_id) const;
};

/// Candidate ordering used by the Z-buffer: a strictly nearer point wins;
/// depths within depth_epsilon of each other tie and the lower point_id wins.
/// Candidates are folded in increasing point_id order, which makes the
/// result deterministic.
bool zbuffer_prefers(double candidate_depth, PointId candidate_id,
                     double incumbent_depth, PointId incumbent_id,
                     double depth_epsilon);

/// Projects every point into every view and keeps the per-pixel winner.
/// Per-view work may run on `threads` workers; the merged result is
/// identical for any thread count.
PointPixelMap build_point_pixel_map(const PointCloud& cloud,
                                    const std::vector<CameraView>& views,
                                    double depth_epsilon = 1e-6,
                                    int threads = 1);

/// Sorted point ids with at least one entry under view_id.
std::vector<PointId> visible_points(const PointPixelMap& map, ViewId view_id);

/// Sorted point ids with at least one entry in any view.
std::vector<PointId> visible_points_any_view(const PointPixelMap& map);

/// Text table `view_id point_id row col depth`, one entry per line in map
/// order; depth uses the shortest round-trip decimal form.
void write_point_pixel_map(const PointPixelMap& map,
                           const std::filesystem::path& path);
PointPixelMap read_point_pixel_map(const std::filesystem::path& path);

}  // namespace extrude3d
