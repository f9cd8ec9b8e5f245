#include "extrude3d/extrusion.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "extrude3d/errors.hpp"
#include "extrude3d/parallel.hpp"

namespace extrude3d {

namespace {

void check_targets(const std::set<ClassId>& targets) {
  if (targets.empty()) {
    raise(Errc::empty_targets, "target class set must not be empty");
  }
  for (ClassId target : targets) {
    if (!is_taxonomy_id(target)) {
      raise(Errc::unknown_class_id,
            "target id " + std::to_string(target) + " is outside the taxonomy");
    }
  }
}

}  // namespace

ClassPixelIndex extract_class_pixels(const LabelMap& map,
                                     const std::set<ClassId>& targets,
                                     const std::string& image_name) {
  check_targets(targets);
  map.validate();
  ClassPixelIndex index;
  index.image_name = image_name;
  // Row-major scan appends pixels already sorted by (row, col).
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      const ClassId label = map.at(r, c);
      if (label != kVoidLabel && targets.count(label)) {
        index.pixels_by_class[label].push_back(PixelCoord{r, c});
      }
    }
  }
  return index;
}

std::filesystem::path write_class_pixel_index(
    const ClassPixelIndex& index, const std::filesystem::path& directory) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  // std::map iterates class ids ascending, giving ascending numeric keys.
  for (const auto& [class_id, pixels] : index.pixels_by_class) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const PixelCoord& pixel : pixels) {
      list.push_back({pixel.row, pixel.col});
    }
    doc[std::to_string(class_id)] = std::move(list);
  }
  const std::filesystem::path path = directory / (index.image_name + ".json");
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  out << doc.dump();
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
  return path;
}

ClassPixelIndex read_class_pixel_index(
    const std::filesystem::path& path,
    const std::optional<ViewGeometry>& geometry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_json, e.what());
  }
  if (!doc.is_object()) {
    raise(Errc::malformed_json, "class pixel index must be a JSON object");
  }

  ClassPixelIndex index;
  index.image_name = path.stem().string();
  for (const auto& [key, value] : doc.items()) {
    int class_id = 0;
    try {
      std::size_t pos = 0;
      class_id = std::stoi(key, &pos);
      if (pos != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      raise(Errc::malformed_json, "non-numeric class key '" + key + "'");
    }
    if (class_id < 0 || !is_taxonomy_id(static_cast<ClassId>(class_id))) {
      raise(Errc::unknown_class_id,
            "class key " + key + " is outside the taxonomy");
    }
    if (!value.is_array()) {
      raise(Errc::malformed_json, "pixel list for class " + key +
                                      " is not an array");
    }
    std::vector<PixelCoord> pixels;
    pixels.reserve(value.size());
    for (const auto& item : value) {
      if (!item.is_array() || item.size() != 2) {
        raise(Errc::malformed_json, "pixel entries must be [row, col] pairs");
      }
      if (!item[0].is_number_integer() || !item[1].is_number_integer()) {
        raise(Errc::non_integer_pixel, "pixel coordinates must be integers");
      }
      const auto row = item[0].get<std::int64_t>();
      const auto col = item[1].get<std::int64_t>();
      if (row < 0 || col < 0) {
        raise(Errc::non_integer_pixel,
              "pixel coordinates must be non-negative");
      }
      if (geometry && (row >= geometry->height || col >= geometry->width)) {
        raise(Errc::pixel_out_of_bounds,
              "pixel [" + std::to_string(row) + ", " + std::to_string(col) +
                  "] exceeds the image bounds");
      }
      pixels.push_back(
          PixelCoord{static_cast<int>(row), static_cast<int>(col)});
    }
    std::sort(pixels.begin(), pixels.end());
    if (std::adjacent_find(pixels.begin(), pixels.end()) != pixels.end()) {
      raise(Errc::duplicate_pixel, "duplicate pixel under class " + key);
    }
    if (!pixels.empty()) {
      index.pixels_by_class[static_cast<ClassId>(class_id)] = std::move(pixels);
    }
  }
  return index;
}

namespace {

constexpr std::uint64_t pack_pixel(PixelCoord pixel) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(pixel.row))
          << 32) |
         static_cast<std::uint32_t>(pixel.col);
}

/// Union of a view's target-class pixel lists as an O(1) membership set.
std::unordered_set<std::uint64_t> build_pixel_set(
    const ClassPixelIndex& index, const std::set<ClassId>& targets) {
  std::size_t total = 0;
  for (ClassId target : targets) {
    const auto it = index.pixels_by_class.find(target);
    if (it != index.pixels_by_class.end()) total += it->second.size();
  }
  std::unordered_set<std::uint64_t> set;
  set.reserve(total * 2);
  for (ClassId target : targets) {
    const auto it = index.pixels_by_class.find(target);
    if (it == index.pixels_by_class.end()) continue;
    for (const PixelCoord& pixel : it->second) set.insert(pack_pixel(pixel));
  }
  return set;
}

}  // namespace

ReductionResult reduce_point_subspace(
    const PointPixelMap& map, const std::map<ViewId, ClassPixelIndex>& indexes,
    const std::set<ClassId>& targets, int threads) {
  // Distinct views in map order; entries are sorted by view_id.
  std::vector<std::pair<ViewId, std::pair<std::size_t, std::size_t>>> spans;
  for (std::size_t i = 0; i < map.entries.size();) {
    const ViewId view_id = map.entries[i].view_id;
    std::size_t end = i;
    while (end < map.entries.size() && map.entries[end].view_id == view_id) {
      ++end;
    }
    spans.emplace_back(view_id, std::make_pair(i, end));
    i = end;
  }

  std::vector<std::vector<MapEntry>> kept_per_view(spans.size());
  parallel_for(spans.size(), threads, [&](std::size_t s) {
    const auto [view_id, range] = spans[s];
    const auto it = indexes.find(view_id);
    if (it == indexes.end()) return;  // no index: nothing retained
    const auto pixel_set = build_pixel_set(it->second, targets);
    if (pixel_set.empty()) return;
    auto& kept = kept_per_view[s];
    for (std::size_t i = range.first; i < range.second; ++i) {
      if (pixel_set.count(pack_pixel(map.entries[i].pixel))) {
        kept.push_back(map.entries[i]);
      }
    }
  });

  ReductionResult result;
  for (std::size_t s = 0; s < spans.size(); ++s) {
    result.per_view_retained[spans[s].first] = kept_per_view[s].size();
    result.reduced_map.entries.insert(result.reduced_map.entries.end(),
                                      kept_per_view[s].begin(),
                                      kept_per_view[s].end());
  }
  result.retained_point_ids.reserve(result.reduced_map.entries.size());
  for (const MapEntry& entry : result.reduced_map.entries) {
    result.retained_point_ids.push_back(entry.point_id);
  }
  std::sort(result.retained_point_ids.begin(), result.retained_point_ids.end());
  result.retained_point_ids.erase(
      std::unique(result.retained_point_ids.begin(),
                  result.retained_point_ids.end()),
      result.retained_point_ids.end());
  return result;
}

}  // namespace extrude3d
