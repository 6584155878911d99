#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "contourline/types.hpp"

namespace contourline {

/// Everything one batch render needs. Exactly one extraction method; the
/// default seed is fixed so runs reproduce byte for byte.
struct JobConfig {
  std::string input_path;

  // camera: "persp:x,y,z" or "ortho:dx,dy,dz"
  std::string camera_spec = "persp:0,0,5";
  Vec3 look_at = Vec3::Zero();
  Vec3 up = Vec3(0, 1, 0);
  double plane_dist = 1.0;  ///< perspective image plane distance
  double plane_size = 0.0;  ///< image window full width in scene units; 0 = fit scene
  int canvas_px = 1024;     ///< long side of the output canvas

  enum class Extract { Brute, Dual, Random, Interpolated };
  enum class VisibilityMode { Ray, Propagate, Qi, Vote };
  Extract extract = Extract::Brute;
  VisibilityMode visibility = VisibilityMode::Qi;

  double simplify_px = 0.0;  ///< topological simplification threshold; 0 = off
  std::string style_path;
  std::string out_svg;
  std::string dump_viewgraph_path;
  std::string dump_chains_path;
  std::string stats_path;
  std::string index_path;  ///< dual index sidecar; built when missing

  std::uint64_t seed = 0;
  int num_seeds = 64;  ///< randomized extraction
  int votes = 3;       ///< vote visibility
  int threads = 0;     ///< 0 = hardware concurrency
  bool hidden_lines = false;
  bool split_near = false;
  bool allow_reorient = false;
  bool silhouette_only = false;
};

struct RunResult {
  int exit_code = 0;
  std::string error;
  std::vector<std::string> stage_log;
  std::map<std::string, long> counters;
  std::string svg;  ///< also written to out_svg when set
};

/// load -> perturb on demand -> extract -> view graph -> visibility ->
/// chain -> simplify -> smooth -> emit. Exit codes: 0 ok, 1 I/O,
/// 2 mesh validation, 3 unresolved degenerate geometry, 4 internal error.
RunResult run(const JobConfig& config);

}  // namespace contourline
