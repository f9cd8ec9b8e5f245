#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "extrude3d/mapping.hpp"
#include "extrude3d/scene.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

/// Per-pixel class labels for one image; 255 marks VOID pixels. Non-VOID
/// values must belong to the built-in taxonomy.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<ClassId> values;  // row-major, height * width

  LabelMap() = default;
  LabelMap(int height, int width, ClassId fill = kVoidLabel);

  ClassId at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  ClassId& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  ClassId at(PixelCoord pixel) const { return at(pixel.row, pixel.col); }

  bool in_bounds(PixelCoord pixel) const {
    return pixel.row >= 0 && pixel.row < height && pixel.col >= 0 &&
           pixel.col < width;
  }

  /// Checks the size/value invariants.
  void validate() const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

enum class PgmFormat { binary_p5, ascii_p2 };

/// Parses a P5 (binary) or P2 (ASCII) PGM with maxval 255; the pixel value
/// is the class id.
LabelMap load_label_map(const std::filesystem::path& path);
void write_label_map(const LabelMap& map, const std::filesystem::path& path,
                     PgmFormat format = PgmFormat::binary_p5);

/// Pixel (r, c) takes the label of the Z-buffer winner at that pixel in
/// `view`; pixels without a winner stay VOID.
LabelMap render_ground_truth_labels(const PointCloud& cloud,
                                    const CameraView& view,
                                    const PointPixelMap& map);

/// Independently flips each non-VOID pixel with probability flip_rate to a
/// uniformly random *different* taxonomy id. Deterministic in (seed, pixel
/// position) and therefore independent of traversal order.
LabelMap inject_label_noise(const LabelMap& map, double flip_rate,
                            std::uint64_t seed);

}  // namespace extrude3d
