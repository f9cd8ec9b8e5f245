#pragma once

#include <stdexcept>
#include <string>

namespace extrude3d {

/// Error kinds raised by the pipeline modules. The CLI maps every Error to
/// exit code 2 (data error); anything else is an internal error (3).
enum class Errc {
  invalid_argument,
  empty_cloud,
  missing_labels,
  duplicate_view_id,
  geometry_mismatch,
  bad_magic,
  bad_dimensions,
  truncated_data,
  unknown_class_id,
  empty_targets,
  io_failure,
  malformed_json,
  non_integer_pixel,
  duplicate_pixel,
  pixel_out_of_bounds,
  out_of_range_point_id,
  duplicate_point_id,
  malformed_prediction,
  missing_truth_label,
  unnormalized_distribution,
  stage_failure,
  point_budget_exceeded,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::empty_cloud: return "EmptyCloud";
    case Errc::missing_labels: return "MissingLabels";
    case Errc::duplicate_view_id: return "DuplicateViewId";
    case Errc::geometry_mismatch: return "GeometryMismatch";
    case Errc::bad_magic: return "BadMagic";
    case Errc::bad_dimensions: return "BadDimensions";
    case Errc::truncated_data: return "TruncatedData";
    case Errc::unknown_class_id: return "UnknownClassId";
    case Errc::empty_targets: return "EmptyTargets";
    case Errc::io_failure: return "IoFailure";
    case Errc::malformed_json: return "MalformedJson";
    case Errc::non_integer_pixel: return "NonIntegerPixel";
    case Errc::duplicate_pixel: return "DuplicatePixel";
    case Errc::pixel_out_of_bounds: return "PixelOutOfBounds";
    case Errc::out_of_range_point_id: return "OutOfRangePointId";
    case Errc::duplicate_point_id: return "DuplicatePointId";
    case Errc::malformed_prediction: return "MalformedPrediction";
    case Errc::missing_truth_label: return "MissingTruthLabel";
    case Errc::unnormalized_distribution: return "UnnormalizedDistribution";
    case Errc::stage_failure: return "StageFailure";
    case Errc::point_budget_exceeded: return "PointBudgetExceeded";
  }
  return "UnknownError";
}

}  // namespace extrude3d
