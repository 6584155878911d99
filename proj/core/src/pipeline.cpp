#include "contourline/pipeline.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "contourline/bvh.hpp"
#include "contourline/camera.hpp"
#include "contourline/errors.hpp"
#include "contourline/extraction.hpp"
#include "contourline/interpolated.hpp"
#include "contourline/mesh.hpp"
#include "contourline/parallel.hpp"
#include "contourline/stylize.hpp"
#include "contourline/view_graph.hpp"
#include "contourline/visibility.hpp"

namespace contourline {

namespace {

Vec3 parse_vec3(const std::string& s) {
  Vec3 v;
  std::istringstream in(s);
  char comma;
  if (!(in >> v.x() >> comma >> v.y() >> comma >> v.z())) throw Error("bad vector '" + s + "'");
  return v;
}

Camera make_camera(const JobConfig& cfg, const Mesh& mesh) {
  const auto colon = cfg.camera_spec.find(':');
  if (colon == std::string::npos) throw Error("camera spec needs kind:values");
  const std::string kind = cfg.camera_spec.substr(0, colon);
  const Vec3 value = parse_vec3(cfg.camera_spec.substr(colon + 1));
  if (kind == "persp" || kind == "perspective")
    return Camera::perspective(value, cfg.look_at, cfg.up, cfg.plane_dist);
  if (kind == "ortho" || kind == "orthographic") {
    // plane placed on the near side of the scene
    Vec3 lo = mesh.vertices.empty() ? Vec3::Zero() : mesh.vertices[0];
    Vec3 hi = lo;
    for (const auto& p : mesh.vertices) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 center = 0.5 * (lo + hi);
    const double diag = (hi - lo).norm();
    const Vec3 dir = value.normalized();
    return Camera::orthographic(dir, center - diag * dir, cfg.up);
  }
  throw Error("unknown camera kind '" + kind + "'");
}

double fit_plane_half_extent(const Mesh& mesh, const Camera& camera) {
  double extent = 0;
  for (const auto& p : mesh.vertices) {
    const auto prj = camera.project(p);
    extent = std::max({extent, std::fabs(prj.uv.x()), std::fabs(prj.uv.y())});
  }
  return extent > 0 ? extent * 1.05 : 1.0;
}

DocStyle load_style(const std::string& path) {
  DocStyle style;
  if (path.empty()) return style;
  std::ifstream in(path);
  if (!in) throw Error("cannot open style file '" + path + "'");
  nlohmann::json doc = nlohmann::json::parse(in);
  auto read_stroke = [](const nlohmann::json& j, StrokeStyle& out) {
    if (j.contains("color")) out.color = j["color"].get<std::string>();
    if (j.contains("opacity")) out.opacity = j["opacity"].get<double>();
    if (j.contains("width")) out.width_px = j["width"].get<double>();
    if (j.contains("taper")) out.taper = j["taper"].get<bool>();
    if (j.contains("dash")) out.dash = j["dash"].get<std::vector<double>>();
  };
  read_stroke(doc, style.visible);
  if (doc.contains("hidden")) read_stroke(doc["hidden"], style.hidden);
  if (doc.contains("background")) style.background = doc["background"].get<std::string>();
  return style;
}

int env_threads() {
  if (const char* env = std::getenv("CONTOURLINE_THREADS")) {
    int v = 0;
    const auto res = std::from_chars(env, env + std::string_view(env).size(), v);
    if (res.ec == std::errc{} && v > 0) return v;
  }
  return default_thread_count();
}

struct StageLogger {
  std::vector<std::string>& log;
  void operator()(const std::string& name) {
    log.push_back(name);
    std::cerr << "[contourline] " << name << "\n";
  }
};

}  // namespace

RunResult run(const JobConfig& config) {
  RunResult result;
  StageLogger stage{result.stage_log};
  const int threads = config.threads > 0 ? config.threads : env_threads();

  Mesh mesh;
  LoadReport report;
  try {
    stage("load");
    ObjOptions opts;
    opts.allow_reorient = config.allow_reorient;
    mesh = load_obj_file(config.input_path, opts, &report);
  } catch (const ParseError& e) {
    result.exit_code = 2;
    result.error = e.what();
    return result;
  } catch (const NonManifoldError& e) {
    result.exit_code = 2;
    result.error = e.what();
    return result;
  } catch (const OrientationError& e) {
    result.exit_code = 2;
    result.error = e.what();
    return result;
  } catch (const Error& e) {
    result.exit_code = 1;
    result.error = e.what();
    return result;
  }
  result.counters["vertices"] = static_cast<long>(mesh.vertices.size());
  result.counters["faces"] = static_cast<long>(mesh.faces.size());
  result.counters["edges"] = static_cast<long>(mesh.edges.size());
  result.counters["boundary_edges"] = mesh.boundary_edge_count;
  result.counters["skipped_obj_records"] = report.skipped_records;

  // geometry that starts out degenerate is perturbed before anything runs
  if (mesh.degenerate_face_count > 0) {
    stage("perturb(pre)");
    mesh = perturb_generic(mesh, 1e-8 * mesh.bbox_diagonal(), config.seed);
  }

  const int max_attempts = 4;
  for (int attempt = 0;; attempt++) {
    try {
      Camera camera = make_camera(config, mesh);
      const double half_extent = config.plane_size > 0 ? 0.5 * config.plane_size
                                                       : fit_plane_half_extent(mesh, camera);
      PixelMap px{half_extent, config.canvas_px};

      // --- extraction -------------------------------------------------
      ContourSet contours;
      VertexField field;
      InterpolatedCurve curve;
      ViewGraph graph;
      ExtractOptions ex;
      ex.threads = threads;
      switch (config.extract) {
        case JobConfig::Extract::Brute:
          stage("extract(brute)");
          contours = extract_brute_force(mesh, camera, ex);
          break;
        case JobConfig::Extract::Dual: {
          stage("extract(dual)");
          DualIndex index = [&] {
            if (!config.index_path.empty() && std::filesystem::exists(config.index_path))
              return DualIndex::load_file(config.index_path, mesh);
            DualIndex built = DualIndex::build(mesh);
            if (!config.index_path.empty()) built.save_file(config.index_path);
            return built;
          }();
          contours = index.query(camera, ex);
          break;
        }
        case JobConfig::Extract::Random: {
          stage("extract(random)");
          RandomizedOptions ro;
          ro.num_seeds = config.num_seeds;
          ro.seed = config.seed;
          contours = extract_randomized(mesh, camera, ro);
          break;
        }
        case JobConfig::Extract::Interpolated:
          stage("extract(interpolated)");
          field = vertex_normals(mesh);
          compute_orientation(mesh, camera, field);
          compute_radial_curvature(mesh, camera, field);
          curve = extract_interpolated(mesh, camera, field);
          interpolated_curtain_folds(curve, mesh, field);
          break;
      }

      // --- view graph, steps in visibility order ----------------------
      stage("graph(build)");
      if (config.extract == JobConfig::Extract::Interpolated)
        graph = build_segments(curve, mesh, camera);
      else
        graph = build_segments(contours, mesh, camera);
      result.counters["segments_initial"] = static_cast<long>(graph.segments.size());
      result.counters["contour_edges"] =
          config.extract == JobConfig::Extract::Interpolated
              ? static_cast<long>(curve.segments.size())
              : static_cast<long>(contours.contour_edges.size());

      stage("graph(mark-local)");
      mark_locally_invisible(graph);
      stage("graph(curtain-folds)");
      detect_curtain_folds(graph);
      stage("graph(surface-intersections)");
      detect_surface_intersections(graph);
      stage("graph(bifurcations)");
      detect_bifurcations(graph);
      stage("graph(image-intersections)");
      IntersectOptions io;
      io.split_near = config.split_near;
      intersect_image_space(graph, io);

      result.counters["singularities_curtain_fold"] = graph.counters.curtain_folds;
      result.counters["singularities_surface"] = graph.counters.surface_intersections;
      result.counters["singularities_bifurcation"] = graph.counters.bifurcations;
      result.counters["singularities_image"] = graph.counters.image_intersections;
      result.counters["split_segments"] = graph.counters.split_segments;

      // --- visibility --------------------------------------------------
      stage("visibility");
      RayAccel accel(mesh);
      VisibilityStats vstats;
      switch (config.visibility) {
        case JobConfig::VisibilityMode::Ray:
          propagate_visibility(graph, accel, PropagationMode::PerSegment, &vstats);
          break;
        case JobConfig::VisibilityMode::Propagate:
          propagate_visibility(graph, accel, PropagationMode::PerChain, &vstats);
          break;
        case JobConfig::VisibilityMode::Qi:
          propagate_qi(graph, accel, &vstats);
          break;
        case JobConfig::VisibilityMode::Vote:
          propagate_votes(graph, accel, config.votes, &vstats);
          break;
      }
      result.counters["ray_tests"] = vstats.ray_tests;
      result.counters["propagated_segments"] = vstats.propagated_segments;
      result.counters["qi_conflicts"] = vstats.qi_conflicts;
      result.counters["grazing_retries"] = vstats.grazing_retries;

      // --- stylization ------------------------------------------------
      stage("chains");
      auto chains = build_chains(graph, px,
                                 config.silhouette_only ? ChainPolicy::SilhouetteOnly
                                                        : ChainPolicy::Default,
                                 &accel);
      if (config.simplify_px > 0) {
        stage("simplify");
        const auto rep = simplify_topology(graph, chains, config.simplify_px, px);
        result.counters["simplify_iterations"] = rep.iterations;
        result.counters["simplify_removed"] = rep.total_removed();
      }
      result.counters["chains"] = static_cast<long>(chains.size());

      stage("smooth");
      const DocStyle style = load_style(config.style_path);
      SmoothParams smooth;
      std::vector<Stroke> strokes;
      for (const auto& chain : chains) {
        if (chain.vis != Visibility::Visible && !config.hidden_lines) continue;
        Stroke stroke = smooth_chain(chain, smooth);
        WidthProfile profile;
        const StrokeStyle& ss =
            chain.vis == Visibility::Visible ? style.visible : style.hidden;
        profile.half_width_px = 0.5 * ss.width_px;
        profile.taper = ss.taper;
        build_ribs(stroke, profile);
        strokes.push_back(std::move(stroke));
      }
      result.counters["strokes"] = static_cast<long>(strokes.size());

      stage("emit");
      result.svg = emit_svg(strokes, style, px.canvas, px.canvas);
      if (!config.out_svg.empty()) {
        std::ofstream out(config.out_svg, std::ios::binary);
        if (!out) throw Error("cannot write '" + config.out_svg + "'");
        out << result.svg;
      }
      if (!config.dump_viewgraph_path.empty()) {
        std::ofstream out(config.dump_viewgraph_path, std::ios::binary);
        out << dump_view_graph(graph);
      }
      if (!config.dump_chains_path.empty()) {
        std::ofstream out(config.dump_chains_path, std::ios::binary);
        out << dump_chains(chains);
      }
      if (!config.stats_path.empty()) {
        nlohmann::json doc(result.counters);
        std::ofstream out(config.stats_path, std::ios::binary);
        out << doc.dump(2) << "\n";
      }

      for (const auto& [key, value] : result.counters)
        std::cerr << "[contourline] " << key << " = " << value << "\n";
      return result;
    } catch (const DegenerateGeometry& e) {
      if (attempt + 1 >= max_attempts) {
        result.exit_code = 3;
        result.error = e.what();
        return result;
      }
      stage("perturb(retry)");
      mesh = perturb_generic(mesh, 1e-8 * mesh.bbox_diagonal(),
                             config.seed + 0x9e3779b9ull * (attempt + 1));
    } catch (const Error& e) {
      result.exit_code = 4;
      result.error = e.what();
      return result;
    }
  }
}

}  // namespace contourline
