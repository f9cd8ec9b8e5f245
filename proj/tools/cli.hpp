#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace extrude3d::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct CylinderParams {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

/// Effective settings of a run; serializable via --dump-config and loadable
/// via --config. Command-line flags override config-file values.
struct PipelineConfig {
  std::string cloud_path;
  std::string calib_path;
  std::string labels_dir;
  std::string out_dir;
  std::string spec_path;           // synth
  std::string map_path;            // stages that consume a serialized map
  std::string indexes_dir;         // reduce
  std::string predictions_path;    // eval / classify --external
  std::string ids_path;            // eval point subset
  std::string baseline_path;       // bench comparison
  std::vector<int> targets;
  double voxel_size = 0.05;
  std::optional<CylinderParams> cylinder;
  double depth_epsilon = 1e-6;
  double z_near = 0.01;
  double flip_rate = 0.0;
  int runs = 5;
  int warmup = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = unset: fall back to EXTRUDE3D_THREADS, then 1
  std::string mode = "reduced";
  std::string stage = "classify";
};

/// Executes one CLI invocation (argv without the program name). Diagnostics
/// go to stderr; artifacts of a failed command are removed.
int run_command(const std::vector<std::string>& args);

}  // namespace extrude3d::cli
