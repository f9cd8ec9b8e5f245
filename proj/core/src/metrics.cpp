#include "extrude3d/metrics.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "extrude3d/errors.hpp"

namespace extrude3d {

std::string class_name(ClassId id) {
  static const std::array<const char*, kNumClasses> names = {
      "road",          "sidewalk",     "building/garage", "wall",
      "fence/gate",    "pole",         "traffic light",   "traffic sign",
      "vegetation",    "terrain",      "person",          "car",
      "truck",         "motorcycle",   "bicycle"};
  if (!is_taxonomy_id(id)) {
    raise(Errc::unknown_class_id,
          "class id " + std::to_string(id) + " has no taxonomy name");
  }
  return names[id];
}

ConfusionCounts& ConfusionCounts::merge(const ConfusionCounts& other) {
  for (int c = 0; c < kNumClasses; ++c) {
    tp[c] += other.tp[c];
    fp[c] += other.fp[c];
    fn[c] += other.fn[c];
    for (int p = 0; p < kNumClasses; ++p) matrix[c][p] += other.matrix[c][p];
  }
  evaluated += other.evaluated;
  unclassified += other.unclassified;
  return *this;
}

ConfusionCounts accumulate_confusion(std::span<const ClassId> truth,
                                     const PredictedLabels& predictions,
                                     std::span<const PointId> eval_point_ids) {
  ConfusionCounts counts;
  for (PointId point : eval_point_ids) {
    if (point >= truth.size() || truth[point] == kVoidLabel) {
      raise(Errc::missing_truth_label,
            "eval point " + std::to_string(point) + " has no truth label");
    }
    const ClassId truth_label = truth[point];
    if (!is_taxonomy_id(truth_label)) {
      raise(Errc::unknown_class_id,
            "truth label " + std::to_string(truth_label) +
                " is outside the taxonomy");
    }
    counts.evaluated++;
    const auto it = predictions.labels.find(point);
    if (it == predictions.labels.end()) {
      counts.fn[truth_label]++;
      counts.unclassified++;
      continue;
    }
    const ClassId predicted = it->second;
    counts.matrix[truth_label][predicted]++;
    if (predicted == truth_label) {
      counts.tp[truth_label]++;
    } else {
      counts.fp[predicted]++;
      counts.fn[truth_label]++;
    }
  }
  return counts;
}

IoUReport iou_per_class(const ConfusionCounts& counts) {
  IoUReport report;
  double sum = 0.0;
  int defined = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const std::uint64_t denom = counts.tp[c] + counts.fp[c] + counts.fn[c];
    if (denom == 0) continue;
    const double iou =
        static_cast<double>(counts.tp[c]) / static_cast<double>(denom);
    report.iou[c] = iou;
    sum += iou;
    ++defined;
  }
  if (defined > 0) report.miou = sum / defined;
  return report;
}

double cross_entropy(std::span<const CrossEntropySample> samples) {
  double total = 0.0;
  for (const CrossEntropySample& sample : samples) {
    if (sample.truth == kVoidLabel || !is_taxonomy_id(sample.truth)) {
      raise(Errc::missing_truth_label,
            "cross-entropy sample lacks a taxonomy truth label");
    }
    double mass = 0.0;
    for (double p : sample.probs) mass += p;
    if (std::abs(mass - 1.0) > 1e-9) {
      raise(Errc::unnormalized_distribution,
            "distribution mass " + std::to_string(mass) + " != 1");
    }
    const double p = std::max(sample.probs[sample.truth], 1e-12);
    total += -std::log(p);
  }
  return samples.empty() ? 0.0 : total / static_cast<double>(samples.size());
}

std::vector<CrossEntropySample> vote_distributions(
    const ViewVotes& votes, std::span<const ClassId> truth) {
  std::vector<CrossEntropySample> samples;
  for (PointId point = 0; point < votes.point_count(); ++point) {
    const std::uint32_t total = votes.total_votes(point);
    if (total == 0) continue;
    if (point >= truth.size() || truth[point] == kVoidLabel) {
      raise(Errc::missing_truth_label,
            "voted point " + std::to_string(point) + " has no truth label");
    }
    CrossEntropySample sample;
    sample.truth = truth[point];
    for (ClassId c = 0; c < kNumClasses; ++c) {
      sample.probs[c] =
          static_cast<double>(votes.count(point, c)) / static_cast<double>(total);
    }
    samples.push_back(sample);
  }
  return samples;
}

// --- Benchmarking --------------------------------------------------------

double resident_memory_mb() {
  // VmRSS in /proc/self/statm, field 2, in pages.
  std::ifstream statm("/proc/self/statm");
  long long total_pages = 0;
  long long resident_pages = 0;
  if (!(statm >> total_pages >> resident_pages)) return 0.0;
  static const long page_size = sysconf(_SC_PAGESIZE);
  return static_cast<double>(resident_pages) * page_size / (1024.0 * 1024.0);
}

namespace {

/// Samples RSS every 10 ms on a background thread, tracking the maximum.
class PeakRssSampler {
 public:
  PeakRssSampler() : peak_mb_(resident_memory_mb()), stop_(false) {
    thread_ = std::thread([this] {
      while (!stop_.load(std::memory_order_relaxed)) {
        sample();
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    });
  }

  ~PeakRssSampler() {
    stop_.store(true, std::memory_order_relaxed);
    thread_.join();
  }

  void sample() {
    const double current = resident_memory_mb();
    double expected = peak_mb_.load(std::memory_order_relaxed);
    while (current > expected &&
           !peak_mb_.compare_exchange_weak(expected, current)) {
    }
  }

  double peak_mb() {
    sample();
    return peak_mb_.load(std::memory_order_relaxed);
  }

 private:
  std::atomic<double> peak_mb_;
  std::atomic<bool> stop_;
  std::thread thread_;
};

}  // namespace

RunStats bench_stage(const BenchableStage& stage, int runs, int warmup) {
  if (runs < 1) raise(Errc::invalid_argument, "bench runs must be >= 1");
  if (warmup < 0) raise(Errc::invalid_argument, "bench warmup must be >= 0");

  RunStats stats;
  stats.runs = runs;
  stats.warmup = warmup;
  stats.program_mb = resident_memory_mb();

  try {
    if (stage.load) stage.load();
    stats.model_mb = std::max(0.0, resident_memory_mb() - stats.program_mb);

    for (int i = 0; i < warmup; ++i) stage.run();

    const double rss_before_runs = resident_memory_mb();
    PeakRssSampler sampler;
    std::vector<double> durations_ms;
    durations_ms.reserve(runs);
    for (int i = 0; i < runs; ++i) {
      const auto start = std::chrono::steady_clock::now();
      stage.run();
      const auto stop = std::chrono::steady_clock::now();
      durations_ms.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
      sampler.sample();
    }
    stats.runtime_mb = std::max(0.0, sampler.peak_mb() - rss_before_runs);

    double sum = 0.0;
    for (double d : durations_ms) sum += d;
    stats.run_time_ms_mean = sum / runs;
    if (runs > 1) {
      double sq = 0.0;
      for (double d : durations_ms) {
        sq += (d - stats.run_time_ms_mean) * (d - stats.run_time_ms_mean);
      }
      stats.run_time_ms_std = std::sqrt(sq / (runs - 1));
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    raise(Errc::stage_failure, e.what());
  }
  return stats;
}

// --- Reports ------------------------------------------------------------

namespace {

nlohmann::ordered_json iou_to_json(const std::optional<double>& iou) {
  if (!iou) return nullptr;
  return *iou;
}

}  // namespace

std::string accuracy_report_json(const ConfusionCounts& counts,
                                 const IoUReport& report) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    nlohmann::ordered_json entry;
    entry["id"] = c;
    entry["name"] = class_name(static_cast<ClassId>(c));
    entry["tp"] = counts.tp[c];
    entry["fp"] = counts.fp[c];
    entry["fn"] = counts.fn[c];
    entry["iou"] = iou_to_json(report.iou[c]);
    classes.push_back(std::move(entry));
  }
  doc["classes"] = std::move(classes);
  doc["miou"] = iou_to_json(report.miou);
  doc["evaluated_points"] = counts.evaluated;
  doc["unclassified_points"] = counts.unclassified;
  return doc.dump(2) + "\n";
}

std::string accuracy_report_table(const ConfusionCounts& counts,
                                  const IoUReport& report) {
  std::ostringstream out;
  out << "IoU per class label (%)\n";
  out << "class";
  for (int c = 0; c < kNumClasses; ++c) out << '\t' << c;
  out << '\n' << "iou";
  out << std::fixed;
  out.precision(2);
  for (int c = 0; c < kNumClasses; ++c) {
    out << '\t';
    if (report.iou[c]) {
      out << (*report.iou[c] * 100.0);
    } else {
      out << '-';
    }
  }
  out << '\n' << "miou\t";
  if (report.miou) {
    out << (*report.miou * 100.0);
  } else {
    out << '-';
  }
  out << '\n';
  out << "evaluated\t" << counts.evaluated << '\n';
  out << "unclassified\t" << counts.unclassified << '\n';
  return out.str();
}

BenchComparison compare_run_stats(const RunStats& baseline,
                                  const RunStats& current) {
  const auto reduction = [](double base, double cur) {
    if (base <= 0.0) return 0.0;
    return (base - cur) / base * 100.0;
  };
  BenchComparison cmp;
  cmp.speedup = current.run_time_ms_mean > 0.0
                    ? baseline.run_time_ms_mean / current.run_time_ms_mean
                    : 0.0;
  cmp.program_mb_reduction_percent = reduction(baseline.program_mb, current.program_mb);
  cmp.model_mb_reduction_percent = reduction(baseline.model_mb, current.model_mb);
  cmp.runtime_mb_reduction_percent = reduction(baseline.runtime_mb, current.runtime_mb);
  return cmp;
}

std::string run_stats_json(const RunStats& stats, const std::string& stage,
                           const std::string& mode,
                           const std::optional<BenchComparison>& comparison) {
  nlohmann::ordered_json doc;
  doc["stage"] = stage;
  doc["mode"] = mode;
  doc["runs"] = stats.runs;
  doc["warmup"] = stats.warmup;
  doc["run_time_ms_mean"] = stats.run_time_ms_mean;
  doc["run_time_ms_std"] = stats.run_time_ms_std;
  doc["program_mb"] = stats.program_mb;
  doc["model_mb"] = stats.model_mb;
  doc["runtime_mb"] = stats.runtime_mb;
  // Without a neural model, model memory is the resident delta from loading
  // the pipeline inputs.
  doc["model_memory_meaning"] = "pipeline input load";
  if (comparison) {
    doc["speedup"] = comparison->speedup;
    doc["program_mb_reduction_percent"] = comparison->program_mb_reduction_percent;
    doc["model_mb_reduction_percent"] = comparison->model_mb_reduction_percent;
    doc["runtime_mb_reduction_percent"] = comparison->runtime_mb_reduction_percent;
  }
  return doc.dump(2) + "\n";
}

RunStats read_run_stats_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_json, e.what());
  }
  RunStats stats;
  try {
    stats.run_time_ms_mean = doc.at("run_time_ms_mean").get<double>();
    stats.run_time_ms_std = doc.at("run_time_ms_std").get<double>();
    stats.program_mb = doc.at("program_mb").get<double>();
    stats.model_mb = doc.at("model_mb").get<double>();
    stats.runtime_mb = doc.at("runtime_mb").get<double>();
    stats.runs = doc.at("runs").get<int>();
    stats.warmup = doc.value("warmup", 0);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_json, e.what());
  }
  return stats;
}

}  // namespace extrude3d
