#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "extrude3d/labels.hpp"
#include "extrude3d/mapping.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

/// Per-point vote histogram over the taxonomy. A point receives one vote per
/// view where it is visible and its winning pixel carries a non-VOID label.
class ViewVotes {
 public:
  explicit ViewVotes(std::size_t point_count)
      : counts_(point_count), total_votes_(point_count, 0) {}

  std::size_t point_count() const { return counts_.size(); }
  std::uint32_t total_votes(PointId point) const { return total_votes_[point]; }
  std::uint32_t count(PointId point, ClassId class_id) const {
    return counts_[point][class_id];
  }

  /// Points with at least one vote, in first-vote order.
  const std::vector<PointId>& voted_points() const { return voted_; }

  void add_vote(PointId point, ClassId class_id) {
    if (total_votes_[point]++ == 0) voted_.push_back(point);
    counts_[point][class_id]++;
  }

 private:
  std::vector<std::array<std::uint32_t, kNumClasses>> counts_;
  std::vector<std::uint32_t> total_votes_;
  std::vector<PointId> voted_;
};

enum class PredictionSource { vote, external };

/// Sparse per-point class predictions; points without a prediction are
/// Unclassified and count as false negatives in evaluation.
struct PredictedLabels {
  std::map<PointId, ClassId> labels;
  PredictionSource source = PredictionSource::vote;
};

/// Tallies one vote per map entry whose pixel label is non-VOID.
/// `point_count` sizes the histogram; every entry's point_id must be below
/// it and every view referenced by the map needs a label map of matching
/// geometry.
ViewVotes collect_votes(const PointPixelMap& map,
                        const std::map<ViewId, LabelMap>& label_maps,
                        std::size_t point_count);

/// Argmax over each point's votes, ties broken by lowest class id; points
/// with zero votes stay unclassified.
PredictedLabels aggregate_majority_vote(const ViewVotes& votes);

/// Parses ASCII lines `point_id class_id` and validates ids against
/// cloud_size and the taxonomy.
PredictedLabels load_external_predictions(const std::filesystem::path& path,
                                          std::size_t cloud_size);

/// Lines `point_id class_id`, sorted by point_id.
void write_predictions(const PredictedLabels& predictions,
                       const std::filesystem::path& path);

}  // namespace extrude3d
