#include "extrude3d/classify.hpp"

#include <fstream>
#include <sstream>

#include "extrude3d/errors.hpp"

namespace extrude3d {

ViewVotes collect_votes(const PointPixelMap& map,
                        const std::map<ViewId, LabelMap>& label_maps,
                        std::size_t point_count) {
  ViewVotes votes(point_count);
  const LabelMap* current = nullptr;
  ViewId current_view = 0;
  for (const MapEntry& entry : map.entries) {
    if (!current || entry.view_id != current_view) {
      const auto it = label_maps.find(entry.view_id);
      if (it == label_maps.end()) {
        raise(Errc::geometry_mismatch,
              "no label map for view " + std::to_string(entry.view_id));
      }
      current = &it->second;
      current_view = entry.view_id;
    }
    if (!current->in_bounds(entry.pixel)) {
      raise(Errc::geometry_mismatch,
            "label map for view " + std::to_string(entry.view_id) +
                " does not cover pixel (" + std::to_string(entry.pixel.row) +
                ", " + std::to_string(entry.pixel.col) + ")");
    }
    if (entry.point_id >= point_count) {
      raise(Errc::out_of_range_point_id,
            "map entry point " + std::to_string(entry.point_id) +
                " exceeds the cloud size");
    }
    const ClassId label = current->at(entry.pixel);
    if (label != kVoidLabel) votes.add_vote(entry.point_id, label);
  }
  return votes;
}

PredictedLabels aggregate_majority_vote(const ViewVotes& votes) {
  PredictedLabels predictions;
  predictions.source = PredictionSource::vote;
  for (const PointId point : votes.voted_points()) {
    ClassId best = 0;
    std::uint32_t best_count = votes.count(point, 0);
    for (ClassId c = 1; c < kNumClasses; ++c) {
      if (votes.count(point, c) > best_count) {
        best = c;
        best_count = votes.count(point, c);
      }
    }
    predictions.labels.emplace(point, best);
  }
  return predictions;
}

PredictedLabels load_external_predictions(const std::filesystem::path& path,
                                          std::size_t cloud_size) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  PredictedLabels predictions;
  predictions.source = PredictionSource::external;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::int64_t point_id = -1;
    std::int64_t class_id = -1;
    std::string trailing;
    if (!(ss >> point_id >> class_id) || (ss >> trailing)) {
      raise(Errc::malformed_prediction,
            "line " + std::to_string(line_no) + ": expected 'point_id class_id'");
    }
    if (point_id < 0 || static_cast<std::size_t>(point_id) >= cloud_size) {
      raise(Errc::out_of_range_point_id,
            "line " + std::to_string(line_no) + ": point id " +
                std::to_string(point_id) + " not in [0, " +
                std::to_string(cloud_size) + ")");
    }
    if (class_id < 0 || !is_taxonomy_id(static_cast<ClassId>(class_id))) {
      raise(Errc::unknown_class_id,
            "line " + std::to_string(line_no) + ": class id " +
                std::to_string(class_id) + " is outside the taxonomy");
    }
    const auto [it, inserted] = predictions.labels.emplace(
        static_cast<PointId>(point_id), static_cast<ClassId>(class_id));
    if (!inserted) {
      raise(Errc::duplicate_point_id,
            "line " + std::to_string(line_no) + ": point id " +
                std::to_string(point_id) + " listed twice");
    }
  }
  return predictions;
}

void write_predictions(const PredictedLabels& predictions,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  for (const auto& [point_id, class_id] : predictions.labels) {
    out << point_id << ' ' << static_cast<int>(class_id) << '\n';
  }
  if (!out) raise(Errc::io_failure, "write failed for " + path.string());
}

}  // namespace extrude3d
