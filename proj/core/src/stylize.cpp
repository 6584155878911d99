#include "contourline/stylize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "contourline/bspline.hpp"
#include "contourline/bvh.hpp"
#include "contourline/errors.hpp"

namespace contourline {

namespace {

bool is_curve_type(const Segment& s, bool contour_like) {
  if (contour_like)
    return s.type == CurveType::Contour || s.type == CurveType::InterpolatedContour;
  return s.type == CurveType::Boundary;
}

// Default-policy continuation through a singularity, or -1.
std::pair<int, int> continue_default(const ViewGraph& graph, int sing, int seg, int end) {
  const Singularity& s = graph.singularities[sing];
  switch (s.kind) {
    case SingKind::ContourCurtainFold:
    case SingKind::BoundaryCurtainFold:
    case SingKind::Bifurcation:
      return {-1, -1};
    case SingKind::ImageIntersection: {
      // far sides stop; split near curves pass through
      IncidenceRole my_role = IncidenceRole::Plain;
      for (const auto& inc : s.incident)
        if (inc.segment == seg && inc.end == end) my_role = inc.role;
      if (my_role != IncidenceRole::Near) return {-1, -1};
      for (const auto& inc : s.incident)
        if (inc.role == IncidenceRole::Near && inc.end >= 0 &&
            !(inc.segment == seg && inc.end == end))
          return {inc.segment, inc.end};
      return {-1, -1};
    }
    case SingKind::SurfaceIntersection: {
      // contours pass through when the continuation is unique; boundaries stop
      if (!is_curve_type(graph.segments[seg], true)) return {-1, -1};
      int found = -1, found_end = -1, count = 0;
      for (const auto& inc : s.incident) {
        if (inc.end < 0 || (inc.segment == seg && inc.end == end)) continue;
        if (!is_curve_type(graph.segments[inc.segment], true)) continue;
        found = inc.segment;
        found_end = inc.end;
        count++;
      }
      return count == 1 ? std::make_pair(found, found_end) : std::make_pair(-1, -1);
    }
  }
  return {-1, -1};
}

struct SilhouetteOracle {
  const ViewGraph& graph;
  const RayAccel* accel;
  double eps;
  mutable std::unordered_map<int, bool> cache;

  bool is_silhouette(int seg_id) const {
    if (!accel) return true;
    auto it = cache.find(seg_id);
    if (it != cache.end()) return it->second;
    const Segment& seg = graph.segments[seg_id];
    // probe just outside the curve in image space: on the side away from the
    // surface, a silhouette sees the background
    const Vec2 mid = 0.5 * (seg.p2[0] + seg.p2[1]);
    Vec2 dir = seg.p2[1] - seg.p2[0];
    if (dir.norm() == 0) return false;
    dir.normalize();
    Vec2 normal(-dir.y(), dir.x());

    // resolve which side the surface projects to with the adjacent face
    Vec2 surface_side = normal;
    if (seg.mesh_edge >= 0) {
      const auto& e = graph.mesh->edges[seg.mesh_edge];
      const int f =
          e.f1 >= 0 && face_facing(*graph.mesh, graph.camera, e.f1) == Facing::Front ? e.f1
                                                                                     : e.f0;
      const Vec3& opp = graph.mesh->vertices[graph.mesh->opposite_vertex(f, seg.mesh_edge)];
      const Vec2 opp2 = graph.camera.project(opp).uv;
      surface_side = (opp2 - mid).dot(normal) >= 0 ? normal : Vec2(-normal);
    }
    const Vec2 probe2 = mid - eps * surface_side;

    bool background;
    const Camera& cam = graph.camera;
    const Vec3 plane_pt =
        cam.plane_origin() + probe2.x() * cam.plane_u() + probe2.y() * cam.plane_w();
    if (cam.kind() == Camera::Kind::Perspective) {
      background = !accel->any_along_ray(cam.center(), plane_pt - cam.center(), {});
    } else {
      background = !accel->any_along_ray(plane_pt, cam.direction(), {});
    }
    cache[seg_id] = background;
    return background;
  }
};

}  // namespace

std::vector<Chain> build_chains(const ViewGraph& graph, const PixelMap& px, ChainPolicy policy,
                                const RayAccel* accel) {
  SilhouetteOracle oracle{graph, accel, 0, {}};
  if (policy == ChainPolicy::SilhouetteOnly) {
    oracle.eps = px.half_extent * 2e-3;
    if (!accel) throw Error("silhouette-only chaining needs a ray accelerator");
  }

  auto passes_policy = [&](int seg) {
    if (policy == ChainPolicy::SilhouetteOnly)
      return graph.segments[seg].vis == Visibility::Visible && oracle.is_silhouette(seg);
    return true;
  };

  std::vector<Chain> chains;
  std::vector<char> claimed(graph.segments.size(), 0);

  auto next_of = [&](int cur, int exit_end) -> std::pair<int, int> {
    const Link& link = graph.segments[cur].links[exit_end];
    if (link.kind == Link::Kind::Segment) return {link.id, link.other_end};
    if (link.kind == Link::Kind::Singularity)
      return continue_default(graph, link.id, cur, exit_end);
    return {-1, -1};
  };
  auto end_node_of = [&](int cur, int exit_end) {
    const Link& link = graph.segments[cur].links[exit_end];
    return link.kind == Link::Kind::Singularity ? link.id : -1;
  };

  for (int s0 = 0; s0 < static_cast<int>(graph.segments.size()); s0++) {
    if (claimed[s0] || graph.segments[s0].replaced) continue;
    if (graph.segments[s0].vis == Visibility::Unknown) throw UnresolvedVisibility{};
    if (!passes_policy(s0)) continue;
    const Visibility vis = graph.segments[s0].vis;

    Chain chain;
    chain.vis = vis;
    std::vector<std::pair<int, int>> run{{s0, 0}};  // (segment, arrival end)
    claimed[s0] = 1;
    bool closed = false;

    // forward out of the head
    {
      int cur = s0, entry = 0;
      while (true) {
        auto [next, arrive] = next_of(cur, 1 - entry);
        if (next < 0 || graph.segments[next].vis != vis || !passes_policy(next)) break;
        if (claimed[next]) {
          closed = next == s0;
          break;
        }
        claimed[next] = 1;
        run.emplace_back(next, arrive);
        cur = next;
        entry = arrive;
      }
      if (!closed) chain.end_node[1] = end_node_of(cur, 1 - entry);
    }
    // backward out of the tail
    if (!closed) {
      int cur = s0, entry = 1;
      while (true) {
        auto [next, arrive] = next_of(cur, 1 - entry);
        if (next < 0 || graph.segments[next].vis != vis || !passes_policy(next) ||
            claimed[next])
          break;
        claimed[next] = 1;
        run.insert(run.begin(), {next, 1 - arrive});
        cur = next;
        entry = arrive;
      }
      chain.end_node[0] = end_node_of(cur, 1 - entry);
    }
    chain.closed = closed;

    chain.segments.reserve(run.size());
    chain.reversed.reserve(run.size());
    chain.polyline_px.reserve(run.size() + 1);
    for (std::size_t i = 0; i < run.size(); i++) {
      const auto [seg, arrive] = run[i];
      chain.segments.push_back(seg);
      chain.reversed.push_back(static_cast<std::uint8_t>(arrive));
      const Vec2 a = px.to_px(graph.segments[seg].p2[arrive]);
      const Vec2 b = px.to_px(graph.segments[seg].p2[1 - arrive]);
      if (i == 0) chain.polyline_px.push_back(a);
      chain.polyline_px.push_back(b);
    }
    for (std::size_t i = 1; i < chain.polyline_px.size(); i++)
      chain.arclength_px += (chain.polyline_px[i] - chain.polyline_px[i - 1]).norm();
    chains.push_back(std::move(chain));
  }

  // T-junction anchors on unsplit near curves
  std::unordered_map<int, std::pair<int, int>> chain_of_segment;  // seg -> (chain, index)
  for (int c = 0; c < static_cast<int>(chains.size()); c++)
    for (int i = 0; i < static_cast<int>(chains[c].segments.size()); i++)
      chain_of_segment[chains[c].segments[i]] = {c, i};
  for (const auto& sing : graph.singularities) {
    if (sing.kind != SingKind::ImageIntersection || sing.near_segment < 0) continue;
    auto it = chain_of_segment.find(sing.near_segment);
    if (it == chain_of_segment.end()) continue;
    auto [c, index] = it->second;
    Chain& chain = chains[c];
    double arc = 0;
    for (int i = 0; i < index; i++)
      arc += (chain.polyline_px[i + 1] - chain.polyline_px[i]).norm();
    const double seg_len = (chain.polyline_px[index + 1] - chain.polyline_px[index]).norm();
    const double local = chain.reversed[index] ? 1.0 - sing.near_t : sing.near_t;
    arc += local * seg_len;
    if (chain.arclength_px > 0)
      chain.anchors.emplace_back(arc / chain.arclength_px, px.to_px(sing.anchor2));
  }
  for (auto& chain : chains)
    std::sort(chain.anchors.begin(), chain.anchors.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  return chains;
}

namespace {

struct NodeKey {
  long long v;
  bool operator==(const NodeKey& o) const { return v == o.v; }
};
struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const { return std::hash<long long>{}(k.v); }
};

NodeKey node_key(const ViewGraph& graph, const Chain& chain, int which) {
  if (chain.end_node[which] >= 0) return {chain.end_node[which]};
  // free end: identify by the outermost segment endpoint
  const int idx = which == 0 ? 0 : static_cast<int>(chain.segments.size()) - 1;
  const int seg = chain.segments[idx];
  const int end = which == 0 ? chain.reversed[idx] : 1 - chain.reversed[idx];
  (void)graph;
  return {-(static_cast<long long>(seg) * 2 + end) - 2};
}

struct GridHash {
  double cell = 1.0;
  std::unordered_map<long long, std::vector<std::pair<Vec2, Vec2>>> cells;  // pos, dir

  long long key(int ix, int iy) const {
    return (static_cast<long long>(ix) << 32) ^ (static_cast<unsigned>(iy));
  }
  void insert(const Vec2& p, const Vec2& dir) {
    cells[key(static_cast<int>(std::floor(p.x() / cell)),
              static_cast<int>(std::floor(p.y() / cell)))]
        .emplace_back(p, dir);
  }
  bool covered(const Vec2& p, const Vec2& dir, double dist_tol, double cos_tol) const {
    const int ix = static_cast<int>(std::floor(p.x() / cell));
    const int iy = static_cast<int>(std::floor(p.y() / cell));
    for (int dx = -1; dx <= 1; dx++)
      for (int dy = -1; dy <= 1; dy++) {
        auto it = cells.find(key(ix + dx, iy + dy));
        if (it == cells.end()) continue;
        for (const auto& [q, qdir] : it->second) {
          if ((q - p).norm() > dist_tol) continue;
          if (std::fabs(qdir.dot(dir)) >= cos_tol) return true;
        }
      }
    return false;
  }
};

std::vector<std::pair<Vec2, Vec2>> resample_with_dirs(const std::vector<Vec2>& poly,
                                                      double spacing) {
  std::vector<std::pair<Vec2, Vec2>> out;
  for (std::size_t i = 1; i < poly.size(); i++) {
    const Vec2 a = poly[i - 1], b = poly[i];
    const double len = (b - a).norm();
    if (len == 0) continue;
    const Vec2 dir = (b - a) / len;
    const int n = std::max(1, static_cast<int>(len / spacing));
    for (int k = 0; k <= n; k++) out.emplace_back(a + (static_cast<double>(k) / n) * (b - a), dir);
  }
  return out;
}

}  // namespace

SimplifyReport simplify_topology(ViewGraph& graph, std::vector<Chain>& chains,
                                 double threshold_px, const PixelMap& px) {
  SimplifyReport report;
  if (threshold_px <= 0) return report;

  for (int iter = 0; iter < 64; iter++) {
    // node degrees over visible chains; unsplit near curves pass through
    // T-junctions and contribute two branches there
    std::unordered_map<NodeKey, int, NodeKeyHash> degree;
    for (const auto& chain : chains) {
      if (chain.vis != Visibility::Visible || chain.closed) continue;
      degree[node_key(graph, chain, 0)]++;
      degree[node_key(graph, chain, 1)]++;
    }
    for (int i = 0; i < static_cast<int>(graph.singularities.size()); i++) {
      const Singularity& sing = graph.singularities[i];
      if (sing.kind != SingKind::ImageIntersection || sing.near_segment < 0) continue;
      // an unsplit visible near curve passes through and adds two branches
      if (!graph.segments[sing.near_segment].replaced &&
          graph.segments[sing.near_segment].vis == Visibility::Visible)
        degree[{i}] += 2;
    }

    // runs: visible chains merged through degree-2 connector nodes
    std::unordered_map<NodeKey, std::vector<int>, NodeKeyHash> chains_at;
    for (int c = 0; c < static_cast<int>(chains.size()); c++) {
      if (chains[c].vis != Visibility::Visible || chains[c].closed) continue;
      chains_at[node_key(graph, chains[c], 0)].push_back(c);
      chains_at[node_key(graph, chains[c], 1)].push_back(c);
    }
    auto is_connector = [&](const NodeKey& k) {
      auto it = degree.find(k);
      return it != degree.end() && it->second == 2;
    };

    std::vector<char> in_run(chains.size(), 0);
    struct Run {
      std::vector<int> chains;
      NodeKey ends[2]{{0}, {0}};
      double arclen = 0;
      bool closed = false;
    };
    std::vector<Run> runs;
    for (int c0 = 0; c0 < static_cast<int>(chains.size()); c0++) {
      if (chains[c0].vis != Visibility::Visible || in_run[c0]) continue;
      if (chains[c0].closed) {
        Run run;
        run.chains = {c0};
        run.arclen = chains[c0].arclength_px;
        run.closed = true;
        in_run[c0] = 1;
        runs.push_back(std::move(run));
        continue;
      }
      Run run;
      run.chains = {c0};
      run.arclen = chains[c0].arclength_px;
      in_run[c0] = 1;
      // extend through connectors in both directions
      for (int dir = 0; dir < 2; dir++) {
        int cur = c0;
        NodeKey node = node_key(graph, chains[cur], dir);
        while (is_connector(node)) {
          const auto& at = chains_at[node];
          if (at.size() != 2) break;
          const int other = at[0] == cur ? at[1] : at[0];
          if (other == cur || in_run[other]) break;
          in_run[other] = 1;
          run.chains.push_back(other);
          run.arclen += chains[other].arclength_px;
          const NodeKey far0 = node_key(graph, chains[other], 0);
          node = far0 == node ? node_key(graph, chains[other], 1) : far0;
          cur = other;
        }
        run.ends[dir] = node;
      }
      runs.push_back(std::move(run));
    }

    // sample cache for the overlap case; candidate runs are checked against
    // chains outside themselves
    std::vector<std::vector<std::pair<Vec2, Vec2>>> samples(chains.size());
    for (int c = 0; c < static_cast<int>(chains.size()); c++) {
      if (chains[c].vis != Visibility::Visible) continue;
      samples[c] = resample_with_dirs(chains[c].polyline_px, 0.5);
    }

    const double cos_tol = std::cos(20.0 * M_PI / 180.0);
    std::vector<int> to_remove;
    std::vector<int> case_ids;
    for (const auto& run : runs) {
      if (run.arclen >= threshold_px) continue;
      int kase = -1;
      if (run.closed) {
        kase = 2;
      } else {
        const int d0 = degree[run.ends[0]];
        const int d1 = degree[run.ends[1]];
        const bool dead0 = d0 <= 1, dead1 = d1 <= 1;
        const bool junc0 = d0 >= 3, junc1 = d1 >= 3;
        if (run.ends[0] == run.ends[1])
          kase = 2;
        else if (dead0 && dead1)
          kase = 1;
        else if ((junc0 && dead1) || (junc1 && dead0))
          kase = 0;
      }
      if (kase < 0) {
        // case (d): duplicated in image space by other chains
        GridHash local;
        local.cell = 1.0;
        bool built = false;
        int total = 0, hit = 0;
        for (int c = 0; c < static_cast<int>(chains.size()); c++) {
          if (chains[c].vis != Visibility::Visible) continue;
          if (std::find(run.chains.begin(), run.chains.end(), c) != run.chains.end()) continue;
          for (const auto& [p, d] : samples[c]) local.insert(p, d);
          built = true;
        }
        if (built) {
          for (int c : run.chains)
            for (const auto& [p, d] : samples[c]) {
              total++;
              if (local.covered(p, d, 1.0, cos_tol)) hit++;
            }
          if (total > 0 && hit >= static_cast<int>(0.95 * total)) kase = 3;
        }
      }
      if (kase < 0) continue;
      for (int c : run.chains) to_remove.push_back(c);
      case_ids.push_back(kase);
    }

    if (to_remove.empty()) {
      report.iterations = iter + 1;
      break;
    }
    for (int k : case_ids) {
      if (k == 0) report.removed_junction_deadend++;
      if (k == 1) report.removed_deadend_deadend++;
      if (k == 2) report.removed_self_loop++;
      if (k == 3) report.removed_overlap++;
    }
    for (int c : to_remove) {
      chains[c].vis = Visibility::Invisible;
      for (int s : chains[c].segments) graph.segments[s].vis = Visibility::Invisible;
    }
    // rebuild chains over the shrunken visible set
    chains = build_chains(graph, px, ChainPolicy::Default, nullptr);
    report.iterations = iter + 1;
  }
  return report;
}

Stroke smooth_chain(const Chain& chain, const SmoothParams& params) {
  Stroke stroke;
  stroke.closed = chain.closed;
  stroke.vis = chain.vis;

  std::vector<Vec2> pts = chain.polyline_px;
  if (chain.closed && pts.size() > 1 && (pts.front() - pts.back()).norm() == 0) pts.pop_back();

  // merge points closer than the minimum spacing
  std::vector<Vec2> dedup;
  for (const auto& p : pts) {
    if (dedup.empty() || (p - dedup.back()).norm() >= params.min_spacing_px) dedup.push_back(p);
  }
  if (!chain.closed && dedup.size() >= 2 && (pts.back() - dedup.back()).norm() > 0)
    dedup.back() = pts.back();

  if (dedup.size() < 4) {
    stroke.center = dedup.size() >= 2 ? dedup : pts;
    if (stroke.center.size() < 2) stroke.center = {pts.front(), pts.front()};
    if (chain.closed && !stroke.center.empty()) stroke.center.push_back(stroke.center.front());
    return stroke;
  }

  const auto t = chord_length_params(dedup);
  const int num_controls =
      std::clamp(static_cast<int>(chain.arclength_px / params.control_spacing_px) + 1, 4,
                 static_cast<int>(dedup.size()));
  const int samples =
      std::max(8, static_cast<int>(chain.arclength_px / params.sample_spacing_px));

  std::vector<std::pair<double, Vec2>> anchors;
  if (params.junction_lock) anchors = chain.anchors;

  if (chain.closed) {
    const auto spline = CubicBSpline2::fit_periodic(dedup, t, num_controls, anchors);
    stroke.center = spline.sample(samples);
    stroke.center.push_back(stroke.center.front());
  } else {
    const auto spline =
        CubicBSpline2::fit_open(dedup, t, num_controls, params.junction_lock, anchors);
    stroke.center = spline.sample(samples);
  }
  return stroke;
}

void build_ribs(Stroke& stroke, const WidthProfile& profile) {
  const int n = static_cast<int>(stroke.center.size());
  stroke.half_width.assign(n, 0.0);
  stroke.ribs.assign(n, Vec2::Zero());
  stroke.fold_clamps = 0;
  if (n < 2) return;

  // drop samples whose neighbors coincide (zero chord)
  std::vector<Vec2> kept;
  kept.reserve(n);
  for (int i = 0; i < n; i++) {
    const int prev = std::max(0, i - 1);
    const int next = std::min(n - 1, i + 1);
    if (i > 0 && i < n - 1 && (stroke.center[next] - stroke.center[prev]).norm() == 0) continue;
    kept.push_back(stroke.center[i]);
  }
  stroke.center = std::move(kept);
  const int m = static_cast<int>(stroke.center.size());
  stroke.half_width.assign(m, 0.0);
  stroke.ribs.assign(m, Vec2::Zero());

  for (int i = 0; i < m; i++) {
    const Vec2& prev = stroke.center[std::max(0, i - 1)];
    const Vec2& next = stroke.center[std::min(m - 1, i + 1)];
    const Vec2 chord = next - prev;
    const double len = chord.norm();
    if (len == 0) continue;

    const double tpar = m > 1 ? static_cast<double>(i) / (m - 1) : 0.0;
    double w = profile.eval(tpar);

    // fold guard: clamp the rib where the osculating radius beats it
    if (i > 0 && i < m - 1) {
      const Vec2& cur = stroke.center[i];
      const double a = (cur - prev).norm();
      const double b = (next - cur).norm();
      const double c = len;
      const double area2 = std::fabs((cur - prev).x() * (next - prev).y() -
                                     (cur - prev).y() * (next - prev).x());
      if (area2 > 1e-12) {
        const double radius = a * b * c / (2.0 * area2);
        if (radius < w) {
          w = radius;
          stroke.fold_clamps++;
        }
      }
    }
    stroke.half_width[i] = w;
    stroke.ribs[i] = w * Vec2(-chord.y(), chord.x()) / len;
  }
}

std::string dump_chains(std::span<const Chain> chains) {
  nlohmann::json doc;
  doc["schema"] = "chains-1";
  doc["chains"] = nlohmann::json::array();
  const char* vis_names[] = {"unknown", "visible", "invisible"};
  for (int c = 0; c < static_cast<int>(chains.size()); c++) {
    const Chain& chain = chains[c];
    nlohmann::json j;
    j["id"] = c;
    j["segments"] = chain.segments;
    j["arclength_px"] = chain.arclength_px;
    j["visibility"] = vis_names[static_cast<int>(chain.vis)];
    j["closed"] = chain.closed;
    doc["chains"].push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace contourline
