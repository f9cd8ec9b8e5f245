#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extrude3d/classify.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d {

/// Paper-order names for the built-in taxonomy ids 0..14.
std::string class_name(ClassId id);

/// Per-class TP/FP/FN counters plus the full truth x predicted matrix.
/// Unclassified points count as FN for their truth class and appear in
/// `unclassified` instead of the matrix.
struct ConfusionCounts {
  std::array<std::uint64_t, kNumClasses> tp{};
  std::array<std::uint64_t, kNumClasses> fp{};
  std::array<std::uint64_t, kNumClasses> fn{};
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> matrix{};
  std::uint64_t evaluated = 0;
  std::uint64_t unclassified = 0;

  ConfusionCounts& merge(const ConfusionCounts& other);

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Tallies eval_point_ids against truth labels. Every eval point must carry
/// a non-VOID truth label.
ConfusionCounts accumulate_confusion(std::span<const ClassId> truth,
                                     const PredictedLabels& predictions,
                                     std::span<const PointId> eval_point_ids);

/// Eq. tp / (tp + fp + fn) per class; classes with a zero denominator are
/// undefined and excluded from the mean.
struct IoUReport {
  std::array<std::optional<double>, kNumClasses> iou{};
  std::optional<double> miou;
};

IoUReport iou_per_class(const ConfusionCounts& counts);

/// One evaluation point for cross-entropy: its truth label and a predicted
/// distribution over the taxonomy.
struct CrossEntropySample {
  ClassId truth = 0;
  std::array<double, kNumClasses> probs{};
};

/// Mean over samples of -ln p(truth), with p floored at 1e-12. Every
/// distribution must sum to 1 within 1e-9 and truth must be non-VOID.
double cross_entropy(std::span<const CrossEntropySample> samples);

/// Normalized vote counts as a distribution; only points with votes yield a
/// sample. Truth labels are indexed by point id.
std::vector<CrossEntropySample> vote_distributions(
    const ViewVotes& votes, std::span<const ClassId> truth);

/// Wall-clock and resident-memory statistics for one measured stage.
struct RunStats {
  double run_time_ms_mean = 0.0;
  double run_time_ms_std = 0.0;  // sample standard deviation over runs
  double program_mb = 0.0;       // RSS before input loading
  double model_mb = 0.0;         // RSS delta from loading pipeline inputs
  double runtime_mb = 0.0;       // peak RSS delta across the measured runs
  int runs = 0;
  int warmup = 0;
};

/// A benchmarkable stage: `load` reads/derives the stage inputs (measured as
/// model memory), `run` executes the stage once (timed).
struct BenchableStage {
  std::function<void()> load;
  std::function<void()> run;
};

/// Executes load, then warmup + runs executions of `run`, timing the last
/// `runs` only. Resident memory is sampled around phases and at a 10 ms
/// cadence during the measured runs. Stage exceptions surface as
/// StageFailure with partial stats discarded.
RunStats bench_stage(const BenchableStage& stage, int runs, int warmup);

/// Current process resident set size in MB (Linux /proc based).
double resident_memory_mb();

// --- Reports ------------------------------------------------------------

/// Accuracy report: per-class {name, tp, fp, fn, iou}, miou and counts.
/// Stable field order, compact floats, deterministic bytes.
std::string accuracy_report_json(const ConfusionCounts& counts,
                                 const IoUReport& report);

/// Plain-text table: one column per class id with IoU in percent.
std::string accuracy_report_table(const ConfusionCounts& counts,
                                  const IoUReport& report);

struct BenchComparison {
  double speedup = 0.0;  // baseline mean / current mean
  double program_mb_reduction_percent = 0.0;
  double model_mb_reduction_percent = 0.0;
  double runtime_mb_reduction_percent = 0.0;
};

BenchComparison compare_run_stats(const RunStats& baseline,
                                  const RunStats& current);

std::string run_stats_json(const RunStats& stats, const std::string& stage,
                           const std::string& mode,
                           const std::optional<BenchComparison>& comparison);

/// Reads the fields written by run_stats_json (for --baseline).
RunStats read_run_stats_json(const std::filesystem::path& path);

}  // namespace extrude3d
