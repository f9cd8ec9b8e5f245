#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>

#include "extrude3d/classify.hpp"
#include "extrude3d/errors.hpp"
#include "extrude3d/extrusion.hpp"
#include "extrude3d/labels.hpp"
#include "extrude3d/mapping.hpp"
#include "extrude3d/metrics.hpp"
#include "extrude3d/parallel.hpp"
#include "extrude3d/scene.hpp"
#include "extrude3d/synth.hpp"
#include "extrude3d/types.hpp"

namespace extrude3d::cli {

namespace fs = std::filesystem;

namespace {

/// Tracks files created by the running command so a failure leaves no
/// partial artifacts behind.
class ArtifactGuard {
 public:
  ~ArtifactGuard() {
    if (committed_) return;
    for (const fs::path& path : paths_) {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }

  fs::path track(fs::path path) {
    paths_.push_back(path);
    return path;
  }

  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> paths_;
  bool committed_ = false;
};

int effective_threads(const PipelineConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("EXTRUDE3D_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}

std::set<ClassId> target_set(const PipelineConfig& config, bool required) {
  std::set<ClassId> targets;
  for (int id : config.targets) {
    if (id < 0 || !is_taxonomy_id(static_cast<ClassId>(id))) {
      raise(Errc::unknown_class_id,
            "target class " + std::to_string(id) + " is outside the taxonomy");
    }
    targets.insert(static_cast<ClassId>(id));
  }
  if (required && targets.empty()) {
    raise(Errc::empty_targets, "this command needs --targets");
  }
  return targets;
}

// --- config (de)serialization -------------------------------------------

nlohmann::ordered_json config_to_json(const PipelineConfig& config) {
  nlohmann::ordered_json doc;
  doc["cloud"] = config.cloud_path;
  doc["calib"] = config.calib_path;
  doc["labels"] = config.labels_dir;
  doc["out"] = config.out_dir;
  doc["spec"] = config.spec_path;
  doc["map"] = config.map_path;
  doc["indexes"] = config.indexes_dir;
  doc["predictions"] = config.predictions_path;
  doc["ids"] = config.ids_path;
  doc["baseline"] = config.baseline_path;
  doc["targets"] = config.targets;
  doc["voxel_size"] = config.voxel_size;
  if (config.cylinder) {
    doc["cylinder"] = {{"cx", config.cylinder->cx},
                       {"cy", config.cylinder->cy},
                       {"radius", config.cylinder->radius}};
  } else {
    doc["cylinder"] = nullptr;
  }
  doc["depth_epsilon"] = config.depth_epsilon;
  doc["z_near"] = config.z_near;
  doc["flip_rate"] = config.flip_rate;
  doc["runs"] = config.runs;
  doc["warmup"] = config.warmup;
  doc["seed"] = config.seed;
  doc["threads"] = config.threads;
  doc["mode"] = config.mode;
  doc["stage"] = config.stage;
  return doc;
}

void config_from_json(const nlohmann::json& doc, PipelineConfig& config) {
  config.cloud_path = doc.value("cloud", config.cloud_path);
  config.calib_path = doc.value("calib", config.calib_path);
  config.labels_dir = doc.value("labels", config.labels_dir);
  config.out_dir = doc.value("out", config.out_dir);
  config.spec_path = doc.value("spec", config.spec_path);
  config.map_path = doc.value("map", config.map_path);
  config.indexes_dir = doc.value("indexes", config.indexes_dir);
  config.predictions_path = doc.value("predictions", config.predictions_path);
  config.ids_path = doc.value("ids", config.ids_path);
  config.baseline_path = doc.value("baseline", config.baseline_path);
  if (doc.contains("targets")) {
    config.targets = doc.at("targets").get<std::vector<int>>();
  }
  config.voxel_size = doc.value("voxel_size", config.voxel_size);
  if (doc.contains("cylinder") && !doc.at("cylinder").is_null()) {
    CylinderParams params;
    params.cx = doc.at("cylinder").value("cx", 0.0);
    params.cy = doc.at("cylinder").value("cy", 0.0);
    params.radius = doc.at("cylinder").value("radius", 0.0);
    config.cylinder = params;
  }
  config.depth_epsilon = doc.value("depth_epsilon", config.depth_epsilon);
  config.z_near = doc.value("z_near", config.z_near);
  config.flip_rate = doc.value("flip_rate", config.flip_rate);
  config.runs = doc.value("runs", config.runs);
  config.warmup = doc.value("warmup", config.warmup);
  config.seed = doc.value("seed", config.seed);
  config.threads = doc.value("threads", config.threads);
  config.mode = doc.value("mode", config.mode);
  config.stage = doc.value("stage", config.stage);
}

void load_config_file(const std::string& path, PipelineConfig& config) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open config " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::malformed_json, e.what());
  }
  config_from_json(doc, config);
}

void dump_config_file(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write config " + path);
  out << config_to_json(config).dump(2) << '\n';
}

// --- shared loading helpers ----------------------------------------------

PointCloud load_cloud(const PipelineConfig& config) {
  if (config.cloud_path.empty()) {
    raise(Errc::io_failure, "this command needs --cloud");
  }
  return read_ply(config.cloud_path);
}

std::vector<CameraView> load_views(const PipelineConfig& config) {
  if (config.calib_path.empty()) {
    raise(Errc::io_failure, "this command needs --calib");
  }
  return read_camera_file(config.calib_path, config.z_near);
}

/// Loads `<labels_dir>/<image_name>.pgm` for every view and checks the
/// dimensions against the calibration.
std::map<ViewId, LabelMap> load_label_maps(
    const std::vector<CameraView>& views, const std::string& labels_dir) {
  if (labels_dir.empty()) raise(Errc::io_failure, "this command needs --labels");
  std::map<ViewId, LabelMap> maps;
  for (const CameraView& view : views) {
    LabelMap map = load_label_map(fs::path(labels_dir) / (view.image_name + ".pgm"));
    if (map.height != view.geometry.height || map.width != view.geometry.width) {
      raise(Errc::geometry_mismatch,
            "label map for '" + view.image_name + "' is " +
                std::to_string(map.width) + "x" + std::to_string(map.height) +
                ", expected " + std::to_string(view.geometry.width) + "x" +
                std::to_string(view.geometry.height));
    }
    maps.emplace(view.view_id, std::move(map));
  }
  return maps;
}

void write_id_list(const std::vector<PointId>& ids, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io_failure, "cannot write " + path.string());
  for (PointId id : ids) out << id << '\n';
}

std::vector<PointId> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_failure, "cannot open " + path.string());
  std::vector<PointId> ids;
  long long value = 0;
  while (in >> value) {
    if (value < 0) raise(Errc::out_of_range_point_id, "negative point id");
    ids.push_back(static_cast<PointId>(value));
  }
  return ids;
}

fs::path ensure_out_dir(const PipelineConfig& config) {
  if (config.out_dir.empty()) raise(Errc::io_failure, "this command needs --out");
  fs::create_directories(config.out_dir);
  return config.out_dir;
}

/// Applies §-style preprocessing (voxel grid, then optional cylinder crop).
/// Returns the cloud to use downstream.
PointCloud preprocess_cloud(const PointCloud& cloud,
                            const PipelineConfig& config,
                            const fs::path& out_dir, ArtifactGuard& guard) {
  PointCloud current = cloud;
  bool changed = false;
  std::vector<PointId> index_map(cloud.size());
  for (PointId i = 0; i < cloud.size(); ++i) index_map[i] = i;

  if (config.voxel_size > 0.0) {
    SubsampleResult subsampled = voxel_subsample(current, config.voxel_size);
    std::vector<PointId> composed(subsampled.index_map.size());
    for (std::size_t i = 0; i < subsampled.index_map.size(); ++i) {
      composed[i] = index_map[subsampled.index_map[i]];
    }
    current = std::move(subsampled.cloud);
    index_map = std::move(composed);
    changed = true;
  }
  if (config.cylinder) {
    SubsampleResult cropped =
        cylinder_crop(current, {config.cylinder->cx, config.cylinder->cy},
                      config.cylinder->radius);
    std::vector<PointId> composed(cropped.index_map.size());
    for (std::size_t i = 0; i < cropped.index_map.size(); ++i) {
      composed[i] = index_map[cropped.index_map[i]];
    }
    current = std::move(cropped.cloud);
    index_map = std::move(composed);
    changed = true;
  }
  if (changed) {
    write_ply(current, guard.track(out_dir / "cloud_pre.ply"));
    write_id_list(index_map, guard.track(out_dir / "pre_index_map.txt"));
  }
  return current;
}

void render_gt_maps(const PointCloud& cloud, const std::vector<CameraView>& views,
                    const PointPixelMap& map, const fs::path& dir,
                    double flip_rate, std::uint64_t seed, int threads,
                    ArtifactGuard& guard) {
  fs::create_directories(dir);
  std::vector<fs::path> paths(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    paths[v] = guard.track(dir / (views[v].image_name + ".pgm"));
  }
  parallel_for(views.size(), threads, [&](std::size_t v) {
    LabelMap rendered = render_ground_truth_labels(cloud, views[v], map);
    if (flip_rate > 0.0) {
      rendered = inject_label_noise(rendered, flip_rate,
                                    seed ^ (0x9e3779b9ULL + views[v].view_id));
    }
    write_label_map(rendered, paths[v]);
  });
}

// --- subcommands ----------------------------------------------------------

int cmd_synth(const PipelineConfig& config, bool demo) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  SceneSpec spec = demo ? demo_scene_spec() : read_scene_spec(config.spec_path);
  if (demo && config.seed != 0) spec.seed = config.seed;

  GeneratedScene scene = generate_scene(spec);
  write_scene_spec(spec, guard.track(out / "scene_spec.txt"));
  write_ply(scene.cloud, guard.track(out / "cloud.ply"));
  write_camera_file(scene.views, guard.track(out / "cameras.txt"));

  const PointPixelMap map = build_point_pixel_map(
      scene.cloud, scene.views, config.depth_epsilon, effective_threads(config));
  render_gt_maps(scene.cloud, scene.views, map, out / "gt", 0.0, 0,
                 effective_threads(config), guard);
  guard.commit();
  std::cout << "synth: " << scene.cloud.size() << " points, "
            << scene.views.size() << " views -> " << out.string() << '\n';
  return kExitOk;
}

int cmd_map(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const PointCloud cloud = load_cloud(config);
  const std::vector<CameraView> views = load_views(config);
  const PointPixelMap map = build_point_pixel_map(
      cloud, views, config.depth_epsilon, effective_threads(config));
  write_point_pixel_map(map, guard.track(out / "map.txt"));
  guard.commit();
  std::cout << "map: " << map.entries.size() << " entries\n";
  return kExitOk;
}

int cmd_render_gt(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const PointCloud cloud = load_cloud(config);
  const std::vector<CameraView> views = load_views(config);
  const PointPixelMap map =
      config.map_path.empty()
          ? build_point_pixel_map(cloud, views, config.depth_epsilon,
                                  effective_threads(config))
          : read_point_pixel_map(config.map_path);
  render_gt_maps(cloud, views, map, out, config.flip_rate, config.seed,
                 effective_threads(config), guard);
  guard.commit();
  std::cout << "render-gt: " << views.size() << " label maps\n";
  return kExitOk;
}

int cmd_extrude(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const std::vector<CameraView> views = load_views(config);
  const std::set<ClassId> targets = target_set(config, /*required=*/true);
  const auto label_maps = load_label_maps(views, config.labels_dir);

  std::vector<fs::path> written(views.size());
  for (std::size_t v = 0; v < views.size(); ++v) {
    written[v] = guard.track(out / (views[v].image_name + ".json"));
  }
  parallel_for(views.size(), effective_threads(config), [&](std::size_t v) {
    const ClassPixelIndex index = extract_class_pixels(
        label_maps.at(views[v].view_id), targets, views[v].image_name);
    write_class_pixel_index(index, out);
  });
  guard.commit();
  std::cout << "extrude: " << views.size() << " index files\n";
  return kExitOk;
}

int cmd_reduce(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const std::vector<CameraView> views = load_views(config);
  const std::set<ClassId> targets = target_set(config, /*required=*/true);
  if (config.map_path.empty()) raise(Errc::io_failure, "reduce needs --map");
  if (config.indexes_dir.empty()) raise(Errc::io_failure, "reduce needs --indexes");
  const PointPixelMap map = read_point_pixel_map(config.map_path);

  std::map<ViewId, ClassPixelIndex> indexes;
  for (const CameraView& view : views) {
    const fs::path path = fs::path(config.indexes_dir) / (view.image_name + ".json");
    if (!fs::exists(path)) continue;  // treated as an empty index
    indexes.emplace(view.view_id, read_class_pixel_index(path, view.geometry));
  }

  const ReductionResult result =
      reduce_point_subspace(map, indexes, targets, effective_threads(config));
  write_point_pixel_map(result.reduced_map, guard.track(out / "map_reduced.txt"));
  write_id_list(result.retained_point_ids, guard.track(out / "retained_ids.txt"));

  nlohmann::ordered_json stats;
  stats["retained_points"] = result.retained_point_ids.size();
  stats["retained_entries"] = result.reduced_map.entries.size();
  stats["input_entries"] = map.entries.size();
  nlohmann::ordered_json per_view = nlohmann::ordered_json::object();
  for (const auto& [view_id, count] : result.per_view_retained) {
    per_view[std::to_string(view_id)] = count;
  }
  stats["per_view_retained"] = std::move(per_view);
  {
    std::ofstream stats_out(guard.track(out / "reduce_stats.json"),
                            std::ios::binary);
    if (!stats_out) raise(Errc::io_failure, "cannot write reduce_stats.json");
    stats_out << stats.dump(2) << '\n';
  }
  guard.commit();
  std::cout << "reduce: " << result.reduced_map.entries.size() << " of "
            << map.entries.size() << " entries retained\n";
  return kExitOk;
}

int cmd_classify(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const PointCloud cloud = load_cloud(config);

  PredictedLabels predictions;
  if (!config.predictions_path.empty()) {
    predictions = load_external_predictions(config.predictions_path, cloud.size());
  } else {
    if (config.map_path.empty()) {
      raise(Errc::io_failure, "classify needs --map or --external");
    }
    const std::vector<CameraView> views = load_views(config);
    const PointPixelMap map = read_point_pixel_map(config.map_path);
    const auto label_maps = load_label_maps(views, config.labels_dir);
    const ViewVotes votes = collect_votes(map, label_maps, cloud.size());
    predictions = aggregate_majority_vote(votes);
  }
  write_predictions(predictions, guard.track(out / "predictions.txt"));
  guard.commit();
  std::cout << "classify: " << predictions.labels.size() << " points labeled\n";
  return kExitOk;
}

int cmd_eval(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const PointCloud cloud = load_cloud(config);
  if (!cloud.labels) {
    raise(Errc::missing_labels, "eval needs a labeled cloud as ground truth");
  }
  if (config.predictions_path.empty()) raise(Errc::io_failure, "eval needs --pred");
  const PredictedLabels predictions =
      load_external_predictions(config.predictions_path, cloud.size());

  std::vector<PointId> eval_ids;
  if (!config.ids_path.empty()) {
    eval_ids = read_id_list(config.ids_path);
  } else {
    for (PointId i = 0; i < cloud.size(); ++i) {
      if ((*cloud.labels)[i] != kVoidLabel) eval_ids.push_back(i);
    }
  }

  const ConfusionCounts counts =
      accumulate_confusion(*cloud.labels, predictions, eval_ids);
  const IoUReport report = iou_per_class(counts);
  {
    std::ofstream json_out(guard.track(out / "report.json"), std::ios::binary);
    if (!json_out) raise(Errc::io_failure, "cannot write report.json");
    json_out << accuracy_report_json(counts, report);
  }
  {
    std::ofstream table_out(guard.track(out / "report.txt"), std::ios::binary);
    if (!table_out) raise(Errc::io_failure, "cannot write report.txt");
    table_out << accuracy_report_table(counts, report);
  }
  guard.commit();
  std::cout << accuracy_report_table(counts, report);
  return kExitOk;
}

/// In-memory inputs shared by the bench stages.
struct BenchInputs {
  PointCloud cloud;
  std::vector<CameraView> views;
  std::map<ViewId, LabelMap> label_maps;
  PointPixelMap map;
  std::map<ViewId, ClassPixelIndex> indexes;
  PointPixelMap stage_map;  // full or reduced, per mode
};

int cmd_bench(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const bool reduced = config.mode == "reduced";
  const int threads = effective_threads(config);

  if (config.stage != "map" && config.stage != "reduce" &&
      config.stage != "classify") {
    raise(Errc::invalid_argument, "unknown bench stage '" + config.stage + "'");
  }
  const std::set<ClassId> targets =
      target_set(config, /*required=*/config.stage == "reduce" || reduced);

  auto inputs = std::make_shared<BenchInputs>();
  volatile std::size_t sink = 0;

  BenchableStage stage;
  if (config.stage == "map") {
    stage.load = [inputs, config] {
      inputs->cloud = load_cloud(config);
      inputs->views = load_views(config);
    };
    stage.run = [inputs, config, threads, &sink] {
      const PointPixelMap map = build_point_pixel_map(
          inputs->cloud, inputs->views, config.depth_epsilon, threads);
      sink = map.entries.size();
    };
  } else if (config.stage == "reduce") {
    stage.load = [inputs, config, targets, threads] {
      inputs->cloud = load_cloud(config);
      inputs->views = load_views(config);
      inputs->label_maps = load_label_maps(inputs->views, config.labels_dir);
      inputs->map = config.map_path.empty()
                        ? build_point_pixel_map(inputs->cloud, inputs->views,
                                                config.depth_epsilon, threads)
                        : read_point_pixel_map(config.map_path);
      for (const CameraView& view : inputs->views) {
        inputs->indexes.emplace(
            view.view_id,
            extract_class_pixels(inputs->label_maps.at(view.view_id), targets,
                                 view.image_name));
      }
    };
    stage.run = [inputs, targets, threads, &sink] {
      const ReductionResult result =
          reduce_point_subspace(inputs->map, inputs->indexes, targets, threads);
      sink = result.retained_point_ids.size();
    };
  } else {  // classify
    stage.load = [inputs, config, targets, reduced, threads] {
      inputs->cloud = load_cloud(config);
      inputs->views = load_views(config);
      inputs->label_maps = load_label_maps(inputs->views, config.labels_dir);
      inputs->map = config.map_path.empty()
                        ? build_point_pixel_map(inputs->cloud, inputs->views,
                                                config.depth_epsilon, threads)
                        : read_point_pixel_map(config.map_path);
      if (reduced) {
        std::map<ViewId, ClassPixelIndex> indexes;
        for (const CameraView& view : inputs->views) {
          indexes.emplace(
              view.view_id,
              extract_class_pixels(inputs->label_maps.at(view.view_id),
                                   targets, view.image_name));
        }
        inputs->stage_map =
            reduce_point_subspace(inputs->map, indexes, targets, threads)
                .reduced_map;
      } else {
        inputs->stage_map = inputs->map;
      }
    };
    stage.run = [inputs, &sink] {
      const ViewVotes votes = collect_votes(inputs->stage_map,
                                            inputs->label_maps,
                                            inputs->cloud.size());
      const PredictedLabels predictions = aggregate_majority_vote(votes);
      sink = predictions.labels.size();
    };
  }

  const RunStats stats = bench_stage(stage, config.runs, config.warmup);
  (void)sink;

  std::optional<BenchComparison> comparison;
  if (!config.baseline_path.empty()) {
    comparison = compare_run_stats(read_run_stats_json(config.baseline_path), stats);
  }
  const std::string json = run_stats_json(stats, config.stage, config.mode, comparison);
  const fs::path path = guard.track(
      out / ("bench_" + config.stage + "_" + config.mode + ".json"));
  {
    std::ofstream json_out(path, std::ios::binary);
    if (!json_out) raise(Errc::io_failure, "cannot write " + path.string());
    json_out << json;
  }
  guard.commit();
  std::cout << json;
  return kExitOk;
}

int cmd_pipeline(const PipelineConfig& config) {
  ArtifactGuard guard;
  const fs::path out = ensure_out_dir(config);
  const bool reduced = config.mode == "reduced";
  if (!reduced && config.mode != "full") {
    raise(Errc::invalid_argument, "pipeline mode must be full or reduced");
  }
  const int threads = effective_threads(config);
  const std::set<ClassId> targets = target_set(config, /*required=*/reduced);

  const PointCloud raw_cloud = load_cloud(config);
  const std::vector<CameraView> views = load_views(config);
  const PointCloud cloud = preprocess_cloud(raw_cloud, config, out, guard);
  if (!cloud.labels) {
    raise(Errc::missing_labels, "pipeline needs a labeled cloud as ground truth");
  }

  const PointPixelMap map =
      build_point_pixel_map(cloud, views, config.depth_epsilon, threads);
  write_point_pixel_map(map, guard.track(out / "map.txt"));

  const auto label_maps = load_label_maps(views, config.labels_dir);

  PointPixelMap stage_map;
  std::vector<PointId> eval_ids;
  if (reduced) {
    const fs::path index_dir = out / "indexes";
    fs::create_directories(index_dir);
    std::vector<fs::path> index_paths(views.size());
    for (std::size_t v = 0; v < views.size(); ++v) {
      index_paths[v] = guard.track(index_dir / (views[v].image_name + ".json"));
    }
    parallel_for(views.size(), threads, [&](std::size_t v) {
      const ClassPixelIndex index = extract_class_pixels(
          label_maps.at(views[v].view_id), targets, views[v].image_name);
      write_class_pixel_index(index, index_dir);
    });

    std::map<ViewId, ClassPixelIndex> indexes;
    for (const CameraView& view : views) {
      indexes.emplace(view.view_id,
                      read_class_pixel_index(
                          index_dir / (view.image_name + ".json"), view.geometry));
    }
    const ReductionResult result =
        reduce_point_subspace(map, indexes, targets, threads);
    write_point_pixel_map(result.reduced_map,
                          guard.track(out / "map_reduced.txt"));
    write_id_list(result.retained_point_ids,
                  guard.track(out / "retained_ids.txt"));
    stage_map = result.reduced_map;
    eval_ids = result.retained_point_ids;
  } else {
    stage_map = map;
    eval_ids = visible_points_any_view(map);
    write_id_list(eval_ids, guard.track(out / "visible_ids.txt"));
  }

  const ViewVotes votes = collect_votes(stage_map, label_maps, cloud.size());
  const PredictedLabels predictions = aggregate_majority_vote(votes);
  write_predictions(predictions, guard.track(out / "predictions.txt"));

  const ConfusionCounts counts =
      accumulate_confusion(*cloud.labels, predictions, eval_ids);
  const IoUReport report = iou_per_class(counts);
  {
    std::ofstream json_out(guard.track(out / "report.json"), std::ios::binary);
    if (!json_out) raise(Errc::io_failure, "cannot write report.json");
    json_out << accuracy_report_json(counts, report);
  }
  {
    std::ofstream table_out(guard.track(out / "report.txt"), std::ios::binary);
    if (!table_out) raise(Errc::io_failure, "cannot write report.txt");
    table_out << accuracy_report_table(counts, report);
  }
  guard.commit();
  std::cout << accuracy_report_table(counts, report);
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  PipelineConfig config;

  // --config is honored before regular parsing so flags can override it.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      try {
        load_config_file(args[i + 1], config);
      } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
      }
      break;
    }
  }

  CLI::App app{"Hybrid 2D->3D semantic segmentation reduction pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  std::string dump_config_path;
  bool demo = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file with defaults");
    cmd->add_option("--dump-config", dump_config_path,
                    "write the effective config to this path");
    cmd->add_option("--threads", config.threads,
                    "worker threads (fallback: EXTRUDE3D_THREADS, then 1)");
    cmd->add_option("--out", config.out_dir, "output directory");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
  add_common(synth);
  synth->add_option("--spec", config.spec_path, "scene spec file");
  synth->add_flag("--demo", demo, "use the built-in demo scene");
  synth->add_option("--seed", config.seed, "override the demo scene seed");
  synth->add_option("--depth-epsilon", config.depth_epsilon, "Z-buffer tie range (m)");

  CLI::App* map_cmd = app.add_subcommand("map", "build the point-pixel map");
  add_common(map_cmd);
  map_cmd->add_option("--cloud", config.cloud_path, "input PLY cloud");
  map_cmd->add_option("--calib", config.calib_path, "camera calibration table");
  map_cmd->add_option("--depth-epsilon", config.depth_epsilon, "Z-buffer tie range (m)");
  map_cmd->add_option("--z-near", config.z_near, "minimum visible depth (m)");

  CLI::App* render = app.add_subcommand("render-gt", "render ground-truth label maps");
  add_common(render);
  render->add_option("--cloud", config.cloud_path, "labeled PLY cloud");
  render->add_option("--calib", config.calib_path, "camera calibration table");
  render->add_option("--map", config.map_path, "reuse a serialized map");
  render->add_option("--flip-rate", config.flip_rate, "label noise probability");
  render->add_option("--seed", config.seed, "noise seed");
  render->add_option("--depth-epsilon", config.depth_epsilon, "Z-buffer tie range (m)");
  render->add_option("--z-near", config.z_near, "minimum visible depth (m)");

  CLI::App* extrude = app.add_subcommand("extrude", "extract per-class pixel indexes");
  add_common(extrude);
  extrude->add_option("--labels", config.labels_dir, "label map directory (PGM)");
  extrude->add_option("--calib", config.calib_path, "camera calibration table");
  extrude->add_option("--targets", config.targets, "target class ids");

  CLI::App* reduce = app.add_subcommand("reduce", "reduce the map to target classes");
  add_common(reduce);
  reduce->add_option("--map", config.map_path, "serialized point-pixel map");
  reduce->add_option("--indexes", config.indexes_dir, "class pixel index directory");
  reduce->add_option("--calib", config.calib_path, "camera calibration table");
  reduce->add_option("--targets", config.targets, "target class ids");

  CLI::App* classify = app.add_subcommand("classify", "vote or ingest predictions");
  add_common(classify);
  classify->add_option("--cloud", config.cloud_path, "input PLY cloud");
  classify->add_option("--map", config.map_path, "serialized point-pixel map");
  classify->add_option("--calib", config.calib_path, "camera calibration table");
  classify->add_option("--labels", config.labels_dir, "label map directory (PGM)");
  classify->add_option("--external", config.predictions_path,
                       "external predictions file to validate and ingest");

  CLI::App* eval = app.add_subcommand("eval", "IoU report against ground truth");
  add_common(eval);
  eval->add_option("--cloud", config.cloud_path, "labeled PLY cloud (truth)");
  eval->add_option("--pred", config.predictions_path, "predictions file");
  eval->add_option("--ids", config.ids_path, "evaluate only these point ids");

  CLI::App* bench = app.add_subcommand("bench", "run-time and memory statistics");
  add_common(bench);
  bench->add_option("--cloud", config.cloud_path, "input PLY cloud");
  bench->add_option("--calib", config.calib_path, "camera calibration table");
  bench->add_option("--labels", config.labels_dir, "label map directory (PGM)");
  bench->add_option("--map", config.map_path, "reuse a serialized map");
  bench->add_option("--targets", config.targets, "target class ids");
  bench->add_option("--stage", config.stage, "map | reduce | classify")
      ->check(CLI::IsMember({"map", "reduce", "classify"}));
  bench->add_option("--mode", config.mode, "full | reduced")
      ->check(CLI::IsMember({"full", "reduced"}));
  bench->add_option("--runs", config.runs, "measured runs");
  bench->add_option("--warmup", config.warmup, "warmup runs");
  bench->add_option("--baseline", config.baseline_path,
                    "baseline bench JSON for speedup/reduction");
  bench->add_option("--depth-epsilon", config.depth_epsilon, "Z-buffer tie range (m)");
  bench->add_option("--z-near", config.z_near, "minimum visible depth (m)");

  CLI::App* pipeline = app.add_subcommand("pipeline", "run all stages end to end");
  add_common(pipeline);
  pipeline->add_option("--cloud", config.cloud_path, "labeled PLY cloud");
  pipeline->add_option("--calib", config.calib_path, "camera calibration table");
  pipeline->add_option("--labels", config.labels_dir, "label map directory (PGM)");
  pipeline->add_option("--targets", config.targets, "target class ids");
  pipeline->add_option("--mode", config.mode, "full | reduced")
      ->check(CLI::IsMember({"full", "reduced"}));
  pipeline->add_option("--voxel-size", config.voxel_size,
                       "voxel subsampling size in m, 0 disables");
  std::vector<double> cylinder_args;
  pipeline->add_option("--cylinder", cylinder_args,
                       "cylinder crop: cx cy radius")
      ->expected(3);
  pipeline->add_option("--depth-epsilon", config.depth_epsilon, "Z-buffer tie range (m)");
  pipeline->add_option("--z-near", config.z_near, "minimum visible depth (m)");
  pipeline->add_option("--seed", config.seed, "seed recorded in the config");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  if (!cylinder_args.empty()) {
    config.cylinder =
        CylinderParams{cylinder_args[0], cylinder_args[1], cylinder_args[2]};
  }

  try {
    if (!dump_config_path.empty()) dump_config_file(config, dump_config_path);
    if (synth->parsed()) {
      if (!demo && config.spec_path.empty()) {
        std::cerr << "usage error: synth needs --spec or --demo\n";
        return kExitUsage;
      }
      return cmd_synth(config, demo);
    }
    if (map_cmd->parsed()) return cmd_map(config);
    if (render->parsed()) return cmd_render_gt(config);
    if (extrude->parsed()) return cmd_extrude(config);
    if (reduce->parsed()) return cmd_reduce(config);
    if (classify->parsed()) return cmd_classify(config);
    if (eval->parsed()) return cmd_eval(config);
    if (bench->parsed()) return cmd_bench(config);
    if (pipeline->parsed()) return cmd_pipeline(config);
    std::cerr << "usage error: no subcommand\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace extrude3d::cli
