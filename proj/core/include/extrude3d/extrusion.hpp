#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "extrude3d/labels.hpp"
#include "extrude3d/mapping.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

/// Per-image mapping class id -> pixels carrying that class. Classes with no
/// pixels are omitted; pixel lists are sorted by (row, col) and free of
/// duplicates.
struct ClassPixelIndex {
  std::string image_name;
  std::map<ClassId, std::vector<PixelCoord>> pixels_by_class;

  friend bool operator==(const ClassPixelIndex&, const ClassPixelIndex&) = default;
};

/// Scans the label map once and collects, for each target class present,
/// the full sorted pixel list.
ClassPixelIndex extract_class_pixels(const LabelMap& map,
                                     const std::set<ClassId>& targets,
                                     const std::string& image_name);

/// Writes `<image_name>.json` into `directory`: a single JSON object with
/// decimal class-id keys in ascending numeric order mapping to arrays of
/// [row, col] pairs. Compact form, no extra fields. Returns the file path.
std::filesystem::path write_class_pixel_index(
    const ClassPixelIndex& index, const std::filesystem::path& directory);

/// Inverse of write_class_pixel_index. When `geometry` is given, pixels are
/// validated against the image bounds.
ClassPixelIndex read_class_pixel_index(
    const std::filesystem::path& path,
    const std::optional<ViewGeometry>& geometry = std::nullopt);

/// Outcome of reducing a point-image map to target classes.
struct ReductionResult {
  PointPixelMap reduced_map;
  std::vector<PointId> retained_point_ids;       // sorted, unique
  std::map<ViewId, std::size_t> per_view_retained;
};

/// Keeps an entry iff its pixel is listed under a target class in the
/// entry's view index; a view without an index keeps nothing. Points are
/// retained when any of their entries survives (union across views).
/// Pixel membership tests use a per-view hash set built once per index
/// instead of the per-entry linear list scan.
ReductionResult reduce_point_subspace(
    const PointPixelMap& map,
    const std::map<ViewId, ClassPixelIndex>& indexes,
    const std::set<ClassId>& targets, int threads = 1);

}  // namespace extrude3d
