#include "extrude3d/mapping.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "extrude3d/errors.hpp"
#include "extrude3d/parallel.hpp"
#include "text_util.hpp"

namespace extrude3d {

std::pair<std::size_t, std::size_t> PointPixelMap::view_range(
    ViewId view_id) const {
  const auto lo = std::lower_bound(
      entries.begin(), entries.end(), view_id,
      [](const MapEntry& e, ViewId id) { return e.view_id < id; });
  const auto hi = std::upper_bound(
      entries.begin(), entries.end(), view_id,
      [](ViewId id, const MapEntry& e) { return id < e.view_id; });
  return {static_cast<std::size_t>(lo - entries.begin()),
          static_cast<std::size_t>(hi - entries.begin())};
}

bool zbuffer_prefers(double candidate_depth, PointId candidate_id,
                     double incumbent_depth, PointId incumbent_id,
                     double depth_epsilon) {
  if (candidate_depth < incumbent_depth - depth_epsilon) return true;
  if (incumbent_depth < candidate_depth - depth_epsilon) return false;
  return candidate_id < incumbent_id;
}

namespace {

std::vector<MapEntry> map_single_view(const PointCloud& cloud,
                                      const CameraView& view,
                                      double depth_epsilon) {
  const std::size_t pixel_count = view.geometry.pixel_count();
  std::vector<double> depth_buffer(pixel_count,
                                   std::numeric_limits<double>::infinity());
  constexpr PointId kEmpty = std::numeric_limits<PointId>::max();
  std::vector<PointId> winner(pixel_count, kEmpty);

  for (PointId i = 0; i < cloud.positions.size(); ++i) {
    const Projection projection = project_point(cloud.positions[i], view);
    if (!projection) continue;
    const std::size_t slot =
        static_cast<std::size_t>(projection->pixel.row) * view.geometry.width +
        projection->pixel.col;
    if (winner[slot] == kEmpty ||
        zbuffer_prefers(projection->depth, i, depth_buffer[slot], winner[slot],
                        depth_epsilon)) {
      depth_buffer[slot] = projection->depth;
      winner[slot] = i;
    }
  }

  std::vector<MapEntry> entries;
  for (std::size_t slot = 0; slot < pixel_count; ++slot) {
    if (winner[slot] == kEmpty) continue;
    entries.push_back(MapEntry{
        view.view_id, winner[slot],
        PixelCoord{static_cast<int>(slot / view.geometry.width),
                   static_cast<int>(slot % view.geometry.width)},
        depth_buffer[slot]});
  }
  return entries;  // already sorted by (row, col)
}

}  // namespace

PointPixelMap build_point_pixel_map(const PointCloud& cloud,
                                    const std::vector<CameraView>& views,
                                    double depth_epsilon, int threads) {
  if (depth_epsilon < 0.0) {
    raise(Errc::invalid_argument, "depth_epsilon must be non-negative");
  }
  if (cloud.positions.size() > std::numeric_limits<PointId>::max()) {
    raise(Errc::invalid_argument, "cloud exceeds the supported point count");
  }
  std::unordered_set<ViewId> seen;
  for (const auto& view : views) {
    view.validate();
    if (!seen.insert(view.view_id).second) {
      raise(Errc::duplicate_view_id,
            "view id " + std::to_string(view.view_id) + " appears twice");
    }
  }

  std::vector<std::vector<MapEntry>> per_view(views.size());
  parallel_for(views.size(), threads, [&](std::size_t v) {
    per_view[v] = map_single_view(cloud, views[v], depth_epsilon);
  });

  PointPixelMap map;
  std::size_t total = 0;
  for (const auto& chunk : per_view) total += chunk.size();
  map.entries.reserve(total);
  for (auto& chunk : per_view) {
    map.entries.insert(map.entries.end(), chunk.begin(), chunk.end());
  }
  // Deterministic merge: (view_id, row, col) keys are unique.
  std::sort(map.entries.begin(), map.entries.end(),
            [](const MapEntry& a, const MapEntry& b) {
              return std::tie(a.view_id, a.pixel.row, a.pixel.col) <
                     std::tie(b.view_id, b.pixel.row, b.pixel.col);
            });
  return map;
}

std::vector<PointId> visible_points(const PointPixelMap& map, ViewId view_id) {
  const auto [begin, end] = map.view_range(view_id);
  std::vector<PointId> ids;
  ids.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    ids.push_back(map.entries[i].point_id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;  // unique by the one-entry-per-view invariant
}

std::vector<PointId> visible_points_any_view(const PointPixelMap& map) {
  std::vector<PointId> ids;
  ids.reserve(map.entries.size());
  for (const auto& entry : map.entries) ids.push_back(entry.point_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void write_point_pixel_map(const PointPixelMap& map,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  for (const auto& entry : map.entries) {
    out << entry.view_id << ' ' << entry.point_id << ' ' << entry.pixel.row
        << ' ' << entry.pixel.col << ' ' << detail::format_double(entry.depth)
        << '\n';
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

PointPixelMap read_point_pixel_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  PointPixelMap map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    MapEntry entry;
    std::string depth_token;
    if (!(ss >> entry.view_id >> entry.point_id >> entry.pixel.row >>
          entry.pixel.col >> depth_token) ||
        !detail::parse_double(depth_token, entry.depth)) {
      raise(Errc::truncated_data,
            "malformed map line " + std::to_string(line_no));
    }
    map.entries.push_back(entry);
  }
  return map;
}

}  // namespace extrude3d
