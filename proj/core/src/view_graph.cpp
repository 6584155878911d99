#include "contourline/view_graph.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "contourline/errors.hpp"
#include "contourline/predicates.hpp"
#include "contourline/sweep.hpp"

#include <nlohmann/json.hpp>

namespace contourline {

namespace {

struct VertexProjector {
  const Mesh& mesh;
  const Camera& camera;
  std::unordered_map<int, Camera::Projected> cache;

  const Camera::Projected& at(int v) {
    auto it = cache.find(v);
    if (it == cache.end()) it = cache.emplace(v, camera.project(mesh.vertices[v])).first;
    return it->second;
  }
};

void connect(ViewGraph& graph, int sa, int ea, int sb, int eb) {
  graph.segments[sa].links[ea] = {Link::Kind::Segment, sb, eb};
  graph.segments[sb].links[eb] = {Link::Kind::Segment, sa, ea};
}

void attach(ViewGraph& graph, int sing, int seg, int end, IncidenceRole role) {
  graph.singularities[sing].incident.push_back({seg, end, role});
  if (end >= 0) graph.segments[seg].links[end] = {Link::Kind::Singularity, sing, -1};
}

// (segment, end) pairs anchored at each mesh vertex
std::unordered_map<int, std::vector<std::pair<int, int>>> vertex_ends(const ViewGraph& graph) {
  std::unordered_map<int, std::vector<std::pair<int, int>>> out;
  for (int s = 0; s < static_cast<int>(graph.segments.size()); s++) {
    if (graph.segments[s].replaced) continue;
    for (int end = 0; end < 2; end++) {
      const int v = graph.segments[s].source[end].vertex;
      if (v >= 0) out[v].emplace_back(s, end);
    }
  }
  return out;
}

// One-ring overlap count: how many faces incident to vertex p (and not
// adjacent to the edge pe) occlude the edge pe. Retries once with the far
// endpoint pulled slightly toward p when a test degenerates.
int one_ring_overlap_count(const Mesh& mesh, const Camera& camera, int vp, int ve,
                           int skip_edge) {
  const Vec3& p = mesh.vertices[vp];
  Vec3 e = mesh.vertices[ve];
  const Eye eye = camera.eye();
  int count = 0;
  for (int f : mesh.faces_of_vertex(vp)) {
    const auto& edge = mesh.edges[skip_edge];
    if (f == edge.f0 || f == edge.f1) continue;
    const auto& tri = mesh.faces[f];
    // order the triangle as (p, q, r)
    int q = -1, r = -1;
    for (int k = 0; k < 3; k++) {
      if (tri[k] == vp) {
        q = tri[(k + 1) % 3];
        r = tri[(k + 2) % 3];
        break;
      }
    }
    if (q == ve || r == ve) continue;  // adjacent to the edge itself
    for (int attempt = 0;; attempt++) {
      try {
        if (edge_occluded_by_face(p, e, mesh.vertices[q], mesh.vertices[r], eye)) count++;
        break;
      } catch (const ZeroOrientation&) {
        if (attempt >= 1) throw;
        e = p + 0.9921875 * (e - p);  // local re-perturbation of the test point
      }
    }
  }
  return count;
}

ViewGraph make_graph(const Mesh& mesh, const Camera& camera, std::string method) {
  ViewGraph graph;
  graph.mesh = &mesh;
  graph.camera = camera;
  graph.method = std::move(method);
  graph.mesh_hash = mesh.content_hash();
  return graph;
}

int add_edge_segment(ViewGraph& graph, VertexProjector& proj, int edge, CurveType type) {
  const Mesh& mesh = *graph.mesh;
  const auto& e = mesh.edges[edge];
  Segment seg;
  seg.type = type;
  seg.mesh_edge = edge;
  seg.p3[0] = mesh.vertices[e.v0];
  seg.p3[1] = mesh.vertices[e.v1];
  const auto& pr0 = proj.at(e.v0);
  const auto& pr1 = proj.at(e.v1);
  seg.p2[0] = pr0.uv;
  seg.p2[1] = pr1.uv;
  seg.depth[0] = pr0.depth;
  seg.depth[1] = pr1.depth;
  seg.source[0] = {e.v0, -1, 0};
  seg.source[1] = {e.v1, -1, 0};
  graph.segments.push_back(seg);
  return static_cast<int>(graph.segments.size()) - 1;
}

void link_plain_vertices(ViewGraph& graph) {
  const auto ends = vertex_ends(graph);
  for (const auto& [vertex, list] : ends) {
    (void)vertex;
    if (list.size() != 2) continue;
    const auto [sa, ea] = list[0];
    const auto [sb, eb] = list[1];
    if (graph.segments[sa].type != graph.segments[sb].type) continue;  // Y-junction later
    connect(graph, sa, ea, sb, eb);
  }
}

}  // namespace

int ViewGraph::other_segment_at(int seg, int end) const {
  const Link& link = segments[seg].links[end];
  return link.kind == Link::Kind::Segment ? link.id : -1;
}

ViewGraph build_segments(const ContourSet& contours, const Mesh& mesh, const Camera& camera) {
  ViewGraph graph = make_graph(mesh, camera, "mesh");
  VertexProjector proj{mesh, camera, {}};

  for (std::size_t i = 0; i < contours.contour_edges.size(); i++) {
    const int id = add_edge_segment(graph, proj, contours.contour_edges[i], CurveType::Contour);
    graph.segments[id].concave = contours.contour_convexity[i] == EdgeConvexity::Concave;
  }
  for (int e : contours.boundary_edges) {
    const int id = add_edge_segment(graph, proj, e, CurveType::Boundary);
    graph.segments[id].backface_boundary =
        face_facing(mesh, camera, mesh.edges[e].f0) == Facing::Back;
  }
  link_plain_vertices(graph);
  return graph;
}

ViewGraph build_segments(const InterpolatedCurve& curve, const Mesh& mesh,
                         const Camera& camera) {
  ViewGraph graph = make_graph(mesh, camera, "interpolated");
  VertexProjector proj{mesh, camera, {}};

  // fold markers split their face segment in two, joined by a singularity
  std::unordered_map<int, const InterpolatedCurve::FoldMarker*> marker_of;
  for (const auto& m : curve.curtain_folds) marker_of[m.segment] = &m;

  // 2D projection per crossing point, shared across the faces meeting there
  std::unordered_map<int, Camera::Projected> edge_point;
  auto project_endpoint = [&](const InterpolatedCurve::Endpoint& pt) {
    auto it = edge_point.find(pt.edge);
    if (it == edge_point.end()) it = edge_point.emplace(pt.edge, camera.project(pt.position)).first;
    return it->second;
  };

  // map: crossed mesh edge -> (segment id, end) pairs for linking
  std::unordered_map<int, std::vector<std::pair<int, int>>> by_edge;

  auto add_piece = [&](const InterpolatedCurve::FaceSegment& fs,
                       const InterpolatedCurve::Endpoint& a, const Vec3& a_pos3,
                       const Camera::Projected& a_prj, const InterpolatedCurve::Endpoint& b,
                       const Vec3& b_pos3, const Camera::Projected& b_prj) {
    Segment seg;
    seg.type = CurveType::InterpolatedContour;
    seg.mesh_face = fs.face;
    seg.p3[0] = a_pos3;
    seg.p3[1] = b_pos3;
    seg.p2[0] = a_prj.uv;
    seg.p2[1] = b_prj.uv;
    seg.depth[0] = a_prj.depth;
    seg.depth[1] = b_prj.depth;
    seg.source[0] = {-1, a.edge, a.t};
    seg.source[1] = {-1, b.edge, b.t};
    graph.segments.push_back(seg);
    const int id = static_cast<int>(graph.segments.size()) - 1;
    if (a.edge >= 0) by_edge[a.edge].emplace_back(id, 0);
    if (b.edge >= 0) by_edge[b.edge].emplace_back(id, 1);
    return id;
  };

  for (int s = 0; s < static_cast<int>(curve.segments.size()); s++) {
    const auto& fs = curve.segments[s];
    const auto pa = project_endpoint(fs.a);
    const auto pb = project_endpoint(fs.b);
    const auto it = marker_of.find(s);
    if (it == marker_of.end()) {
      add_piece(fs, fs.a, fs.a.position, pa, fs.b, fs.b.position, pb);
      continue;
    }
    const auto& m = *it->second;
    const auto pm = camera.project(m.position);
    InterpolatedCurve::Endpoint mid;  // interior point, no mesh edge
    mid.edge = -1;
    const int near_id = add_piece(fs, fs.a, fs.a.position, pa, mid, m.position, pm);
    const int far_id = add_piece(fs, mid, m.position, pm, fs.b, fs.b.position, pb);

    Singularity sing;
    sing.kind = SingKind::ContourCurtainFold;
    sing.anchor2 = pm.uv;
    sing.anchor3 = m.position;
    graph.singularities.push_back(sing);
    const int sid = static_cast<int>(graph.singularities.size()) - 1;
    attach(graph, sid, near_id, 1, IncidenceRole::Near);
    attach(graph, sid, far_id, 0, IncidenceRole::FarOccluded);
    graph.counters.curtain_folds++;
  }

  for (const auto& [edge, list] : by_edge) {
    (void)edge;
    if (list.size() != 2) continue;
    connect(graph, list[0].first, list[0].second, list[1].first, list[1].second);
  }

  // boundary edges are curves of their own
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++) {
    if (!mesh.is_boundary_edge(e)) continue;
    const int id = add_edge_segment(graph, proj, e, CurveType::Boundary);
    graph.segments[id].backface_boundary =
        face_facing(mesh, camera, mesh.edges[e].f0) == Facing::Back;
  }
  // plain boundary-to-boundary links at shared vertices
  link_plain_vertices(graph);
  return graph;
}

void detect_curtain_folds(ViewGraph& graph) {
  const Mesh& mesh = *graph.mesh;
  const auto ends = vertex_ends(graph);
  for (const auto& [vertex, list] : ends) {
    if (list.size() != 2) continue;
    const auto [sa, ea] = list[0];
    const auto [sb, eb] = list[1];
    Segment& A = graph.segments[sa];
    Segment& B = graph.segments[sb];
    if (A.type != B.type) continue;

    int near_seg = -1, near_end = -1, far_seg = -1, far_end = -1;
    int qi_step = 1;
    if (A.type == CurveType::Contour) {
      if (A.concave == B.concave) continue;
      near_seg = A.concave ? sb : sa;
      near_end = A.concave ? eb : ea;
      far_seg = A.concave ? sa : sb;
      far_end = A.concave ? ea : eb;
      const Segment& far = graph.segments[far_seg];
      const auto& fe = mesh.edges[far.mesh_edge];
      const int other = fe.v0 == vertex ? fe.v1 : fe.v0;
      qi_step = std::max(
          1, one_ring_overlap_count(mesh, graph.camera, vertex, other, far.mesh_edge));
    } else if (A.type == CurveType::Boundary) {
      const auto far_vertex_of = [&](const Segment& s) {
        const auto& e = mesh.edges[s.mesh_edge];
        return e.v0 == vertex ? e.v1 : e.v0;
      };
      const int occ_a =
          one_ring_overlap_count(mesh, graph.camera, vertex, far_vertex_of(A), A.mesh_edge);
      const int occ_b =
          one_ring_overlap_count(mesh, graph.camera, vertex, far_vertex_of(B), B.mesh_edge);
      const bool a_occ = occ_a > 0, b_occ = occ_b > 0;
      if (a_occ == b_occ) continue;  // neither, or the spurious both-occluded case
      near_seg = a_occ ? sb : sa;
      near_end = a_occ ? eb : ea;
      far_seg = a_occ ? sa : sb;
      far_end = a_occ ? ea : eb;
      qi_step = a_occ ? occ_a : occ_b;
    } else {
      continue;  // interpolated folds were inserted at build time
    }

    Singularity sing;
    sing.kind = A.type == CurveType::Contour ? SingKind::ContourCurtainFold
                                             : SingKind::BoundaryCurtainFold;
    sing.mesh_vertex = vertex;
    sing.anchor3 = mesh.vertices[vertex];
    sing.anchor2 = graph.segments[near_seg].p2[near_end];
    sing.qi_step = qi_step;
    graph.singularities.push_back(sing);
    const int sid = static_cast<int>(graph.singularities.size()) - 1;
    attach(graph, sid, near_seg, near_end, IncidenceRole::Near);
    attach(graph, sid, far_seg, far_end, IncidenceRole::FarOccluded);
    graph.counters.curtain_folds++;
  }
}

namespace {

// Splits `seg` at increasing interior local parameters, lerping scene points
// and reprojecting them. Returns the child ids in order; the parent keeps a
// tombstone (links cleared, not referenced anywhere afterwards).
std::vector<int> split_segment(ViewGraph& graph, int seg,
                               const std::vector<std::pair<double, Camera::Projected>>& cuts,
                               const std::vector<Vec3>& cut_points) {
  Segment parent = graph.segments[seg];
  const int n = static_cast<int>(cuts.size());
  std::vector<int> children;
  children.reserve(n + 1);

  for (int k = 0; k <= n; k++) {
    Segment child = parent;
    child.parent = parent.parent >= 0 ? parent.parent : seg;
    if (k > 0) {
      child.p3[0] = cut_points[k - 1];
      child.p2[0] = cuts[k - 1].second.uv;
      child.depth[0] = cuts[k - 1].second.depth;
      child.source[0] = {-1, -1, 0};
      child.links[0] = {};
    }
    if (k < n) {
      child.p3[1] = cut_points[k];
      child.p2[1] = cuts[k].second.uv;
      child.depth[1] = cuts[k].second.depth;
      child.source[1] = {-1, -1, 0};
      child.links[1] = {};
    }
    const double lo = k == 0 ? 0.0 : cuts[k - 1].first;
    const double hi = k == n ? 1.0 : cuts[k].first;
    child.t0 = parent.t0 + lo * (parent.t1 - parent.t0);
    child.t1 = parent.t0 + hi * (parent.t1 - parent.t0);
    graph.segments.push_back(child);
    children.push_back(static_cast<int>(graph.segments.size()) - 1);
  }

  // outer links and singularity references move to the outer children
  for (int end = 0; end < 2; end++) {
    const Link& link = parent.links[end];
    const int child = end == 0 ? children.front() : children.back();
    if (link.kind == Link::Kind::Segment) {
      graph.segments[link.id].links[link.other_end] = {Link::Kind::Segment, child, end};
    } else if (link.kind == Link::Kind::Singularity) {
      for (auto& inc : graph.singularities[link.id].incident)
        if (inc.segment == seg && inc.end == end) inc.segment = child;
    }
  }
  for (auto& sing : graph.singularities) {
    if (sing.near_segment == seg) {
      // remap mid-segment attachments by parameter
      const double t = sing.near_t;
      for (int k = 0; k <= n; k++) {
        const double lo = k == 0 ? 0.0 : cuts[k - 1].first;
        const double hi = k == n ? 1.0 : cuts[k].first;
        if (t >= lo && t <= hi) {
          sing.near_segment = children[k];
          sing.near_t = hi > lo ? (t - lo) / (hi - lo) : 0.5;
          break;
        }
      }
    }
  }

  // the tombstone keeps geometry for debugging but drops out of traversal
  graph.segments[seg].links[0] = {};
  graph.segments[seg].links[1] = {};
  graph.segments[seg].replaced = true;
  graph.counters.split_segments += n;
  return children;
}

}  // namespace

void detect_surface_intersections(ViewGraph& graph) {
  const Mesh& mesh = *graph.mesh;
  const Camera& camera = graph.camera;

  // vertex case: contour and boundary curves through one mesh vertex
  const auto ends = vertex_ends(graph);
  for (const auto& [vertex, list] : ends) {
    int contours = 0, boundaries = 0;
    for (const auto& [s, e] : list) {
      (void)e;
      if (graph.segments[s].type == CurveType::Boundary)
        boundaries++;
      else
        contours++;
    }
    if (contours == 0 || boundaries == 0) continue;

    Singularity sing;
    sing.kind = SingKind::SurfaceIntersection;
    sing.mesh_vertex = vertex;
    sing.anchor3 = mesh.vertices[vertex];
    sing.anchor2 = graph.segments[list[0].first].p2[list[0].second];
    graph.singularities.push_back(sing);
    const int sid = static_cast<int>(graph.singularities.size()) - 1;

    // the far boundary edge is the one locally occluded by a one-ring face
    int occluded_count = 0;
    int far_seg = -1, far_end = -1;
    for (const auto& [s, e] : list) {
      if (graph.segments[s].type != CurveType::Boundary) continue;
      const auto& me = mesh.edges[graph.segments[s].mesh_edge];
      const int other = me.v0 == vertex ? me.v1 : me.v0;
      if (one_ring_overlap_count(mesh, camera, vertex, other,
                                 graph.segments[s].mesh_edge) > 0) {
        occluded_count++;
        far_seg = s;
        far_end = e;
      }
    }
    graph.singularities[sid].qi_step = occluded_count == 1 ? 1 : 0;
    graph.singularities[sid].y_increment_audited = true;

    for (const auto& [s, e] : list) {
      IncidenceRole role = IncidenceRole::Plain;
      if (s == far_seg && e == far_end && occluded_count == 1) role = IncidenceRole::FarOccluded;
      attach(graph, sid, s, e, role);
    }
    graph.counters.surface_intersections++;
  }

  // interpolated case: a contour endpoint lying on a boundary mesh edge;
  // the shared edge reference decides, no numerics involved
  std::unordered_map<int, int> boundary_seg_of_edge;
  for (int s = 0; s < static_cast<int>(graph.segments.size()); s++)
    if (graph.segments[s].type == CurveType::Boundary && !graph.segments[s].replaced &&
        graph.segments[s].parent < 0)
      boundary_seg_of_edge[graph.segments[s].mesh_edge] = s;

  struct Hit {
    int contour_seg, contour_end, boundary_seg;
    double t;  // on the boundary edge, v0 -> v1
  };
  std::vector<Hit> hits;
  for (int s = 0; s < static_cast<int>(graph.segments.size()); s++) {
    const Segment& seg = graph.segments[s];
    if (seg.type != CurveType::InterpolatedContour) continue;
    for (int end = 0; end < 2; end++) {
      const int edge = seg.source[end].edge;
      if (edge < 0) continue;
      auto it = boundary_seg_of_edge.find(edge);
      if (it == boundary_seg_of_edge.end()) continue;
      hits.push_back({s, end, it->second, seg.source[end].t});
    }
  }
  // group by boundary segment so several contour endpoints split it once
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.boundary_seg < b.boundary_seg || (a.boundary_seg == b.boundary_seg && a.t < b.t);
  });
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j].boundary_seg == hits[i].boundary_seg) j++;
    const int bseg = hits[i].boundary_seg;

    std::vector<std::pair<double, Camera::Projected>> cuts;
    std::vector<Vec3> cut_points;
    for (std::size_t k = i; k < j; k++) {
      const Segment& cseg = graph.segments[hits[k].contour_seg];
      const int cend = hits[k].contour_end;
      Camera::Projected pr;
      pr.uv = cseg.p2[cend];
      pr.depth = cseg.depth[cend];
      cuts.emplace_back(hits[k].t, pr);
      cut_points.push_back(cseg.p3[cend]);
    }
    const auto children = split_segment(graph, bseg, cuts, cut_points);

    for (std::size_t k = i; k < j; k++) {
      Singularity sing;
      sing.kind = SingKind::SurfaceIntersection;
      sing.anchor2 = cuts[k - i].second.uv;
      sing.anchor3 = cut_points[k - i];
      graph.singularities.push_back(sing);
      const int sid = static_cast<int>(graph.singularities.size()) - 1;
      attach(graph, sid, hits[k].contour_seg, hits[k].contour_end, IncidenceRole::Plain);
      attach(graph, sid, children[k - i], 1, IncidenceRole::Plain);
      attach(graph, sid, children[k - i + 1], 0, IncidenceRole::Plain);
      graph.counters.surface_intersections++;
    }
    i = j;
  }
}

void detect_bifurcations(ViewGraph& graph) {
  const auto ends = vertex_ends(graph);
  for (const auto& [vertex, list] : ends) {
    if (list.size() < 3) continue;
    bool mixed = false;
    for (const auto& [s, e] : list) {
      (void)e;
      if (graph.segments[s].type != graph.segments[list[0].first].type) mixed = true;
    }
    if (mixed) continue;  // handled as a surface intersection

    Singularity sing;
    sing.kind = SingKind::Bifurcation;
    sing.mesh_vertex = vertex;
    sing.anchor3 = graph.mesh->vertices[vertex];
    sing.anchor2 = graph.segments[list[0].first].p2[list[0].second];
    graph.singularities.push_back(sing);
    const int sid = static_cast<int>(graph.singularities.size()) - 1;
    for (const auto& [s, e] : list) attach(graph, sid, s, e, IncidenceRole::Plain);
    graph.counters.bifurcations++;
  }
}

namespace {

bool logically_adjacent(const ViewGraph& graph, int a, int b) {
  const Segment& A = graph.segments[a];
  const Segment& B = graph.segments[b];
  const int pa = A.parent >= 0 ? A.parent : a;
  const int pb = B.parent >= 0 ? B.parent : b;
  if (pa == pb) return true;
  if (A.mesh_edge >= 0 && A.mesh_edge == B.mesh_edge) return true;
  if (A.mesh_face >= 0 && A.mesh_face == B.mesh_face) return true;
  // mesh curves sharing a vertex intersect on the surface, not in the image
  if (A.mesh_edge >= 0 && B.mesh_edge >= 0) {
    const auto& ea = graph.mesh->edges[A.mesh_edge];
    const auto& eb = graph.mesh->edges[B.mesh_edge];
    if (ea.v0 == eb.v0 || ea.v0 == eb.v1 || ea.v1 == eb.v0 || ea.v1 == eb.v1) return true;
  }
  // interpolated contour ending on a boundary edge
  auto on_edge = [](const Segment& s, int edge) {
    return s.source[0].edge == edge || s.source[1].edge == edge;
  };
  if (A.mesh_edge >= 0 && B.mesh_face >= 0 && on_edge(B, A.mesh_edge)) return true;
  if (B.mesh_edge >= 0 && A.mesh_face >= 0 && on_edge(A, B.mesh_edge)) return true;
  // interpolated segments sharing a crossing point
  for (int i = 0; i < 2; i++)
    for (int j = 0; j < 2; j++)
      if (A.source[i].edge >= 0 && A.source[i].edge == B.source[j].edge) return true;
  return false;
}

// perspective-correct conversion of an image-affine parameter to the scene
// parameter along the 3D segment
double image_param_to_scene(const ViewGraph& graph, const Segment& seg, double s) {
  if (graph.camera.kind() == Camera::Kind::Orthographic) return s;
  const Vec3 m = graph.camera.plane_u().cross(graph.camera.plane_w());
  const double wa = (seg.p3[0] - graph.camera.center()).dot(m);
  const double wb = (seg.p3[1] - graph.camera.center()).dot(m);
  const double denom = s * wa + (1.0 - s) * wb;
  return denom == 0.0 ? s : s * wa / denom;
}

// vertex marking the surface side of a curve segment, for the overlap test
int surface_side_vertex(const ViewGraph& graph, const Segment& seg) {
  const Mesh& mesh = *graph.mesh;
  if (seg.type == CurveType::InterpolatedContour) {
    // the front-facing side of the face carries the surface toward the camera
    const auto& tri = mesh.faces[seg.mesh_face];
    int best = tri[0];
    double best_g = 0;
    bool first = true;
    for (int v : tri) {
      const Vec3 view = graph.camera.kind() == Camera::Kind::Perspective
                            ? Vec3(mesh.vertices[v] - graph.camera.center())
                            : graph.camera.direction();
      const double g = view.dot(mesh.face_normals[seg.mesh_face]);
      if (first || g < best_g) {
        best_g = g;
        best = v;
        first = false;
      }
    }
    return best;
  }
  const auto& e = mesh.edges[seg.mesh_edge];
  if (seg.type == CurveType::Boundary) return mesh.opposite_vertex(e.f0, seg.mesh_edge);
  // contour: the front face folds over the occluded side
  const int front = face_facing(mesh, graph.camera, e.f0) == Facing::Front ? e.f0 : e.f1;
  return mesh.opposite_vertex(front, seg.mesh_edge);
}

}  // namespace

void intersect_image_space(ViewGraph& graph, const IntersectOptions& opts) {
  const int initial = static_cast<int>(graph.segments.size());
  std::vector<SweepSegment> sweep_in;
  sweep_in.reserve(initial);
  for (int s = 0; s < initial; s++) {
    if (graph.segments[s].replaced) continue;
    sweep_in.push_back({graph.segments[s].p2[0], graph.segments[s].p2[1], s});
  }
  const auto pairs = sweep_intersections(
      sweep_in, [&](int a, int b) { return logically_adjacent(graph, a, b); });

  struct CrossRec {
    int near_seg, far_seg;
    double near_scene_t, far_scene_t;
    Camera::Projected at;
    Vec3 near_p3, far_p3;
  };
  std::vector<CrossRec> crossings;
  std::map<int, std::vector<double>> far_cut_params;  // ordered for determinism

  for (const auto& pr : pairs) {
    const Segment& A = graph.segments[pr.first];
    const Segment& B = graph.segments[pr.second];
    const auto hit = segments_intersect_2d(A.p2[0], A.p2[1], B.p2[0], B.p2[1]);
    if (!hit) continue;
    const double ta = image_param_to_scene(graph, A, hit->s);
    const double tb = image_param_to_scene(graph, B, hit->t);
    const Vec3 pa = A.p3[0] + ta * (A.p3[1] - A.p3[0]);
    const Vec3 pb = B.p3[0] + tb * (B.p3[1] - B.p3[0]);
    const double da = graph.camera.project(pa).depth;
    const double db = graph.camera.project(pb).depth;
    if (da == db) throw DegenerateDepthTie{};
    CrossRec rec;
    if (da < db) {
      rec = {pr.first, pr.second, ta, tb, {}, pa, pb};
    } else {
      rec = {pr.second, pr.first, tb, ta, {}, pb, pa};
    }
    rec.at = graph.camera.project(rec.far_p3);
    crossings.push_back(rec);
    far_cut_params[rec.far_seg].push_back(rec.far_scene_t);
    if (opts.split_near) far_cut_params[rec.near_seg].push_back(rec.near_scene_t);
  }

  // split all far segments once, in sorted parameter order
  std::map<int, std::pair<std::vector<double>, std::vector<int>>> split_map;
  for (auto& [seg, params] : far_cut_params) {
    std::sort(params.begin(), params.end());
    params.erase(std::unique(params.begin(), params.end()), params.end());
    std::vector<std::pair<double, Camera::Projected>> cuts;
    std::vector<Vec3> cut_points;
    for (double t : params) {
      const Segment& s = graph.segments[seg];
      const Vec3 p = s.p3[0] + t * (s.p3[1] - s.p3[0]);
      cuts.emplace_back(t, graph.camera.project(p));
      cut_points.push_back(p);
    }
    const auto children = split_segment(graph, seg, cuts, cut_points);
    split_map[seg] = {params, children};
  }

  auto resolve = [&](int seg, double t) -> std::pair<int, int> {
    // child containing parameter t, and the cut index at t (or -1)
    auto it = split_map.find(seg);
    if (it == split_map.end()) return {seg, -1};
    const auto& [params, children] = it->second;
    int k = 0;
    while (k < static_cast<int>(params.size()) && params[k] < t) k++;
    const bool at_cut = k < static_cast<int>(params.size()) && params[k] == t;
    return {children[k], at_cut ? k : -1};
  };

  for (const auto& rec : crossings) {
    Singularity sing;
    sing.kind = SingKind::ImageIntersection;
    sing.anchor2 = rec.at.uv;
    sing.anchor3 = rec.far_p3;
    sing.near_is_boundary = graph.segments[rec.near_seg].type == CurveType::Boundary;
    graph.singularities.push_back(sing);
    const int sid = static_cast<int>(graph.singularities.size()) - 1;
    Singularity& S = graph.singularities[sid];

    // far children on each side of the cut
    const auto [far_child_low, cut_index] = resolve(rec.far_seg, rec.far_scene_t);
    if (cut_index < 0) throw Error("image-space split lost a crossing parameter");
    const auto& far_children = split_map[rec.far_seg].second;
    const int far_child_high = far_children[cut_index + 1];

    // which far side the near surface occludes: side of the plane through
    // the near curve and the eye on which the adjacent-face vertex f lies
    const Segment& near = graph.segments[rec.near_seg];
    const Vec3& a = near.p3[0];
    const Vec3& b = near.p3[1];
    const Vec3& f = graph.mesh->vertices[surface_side_vertex(graph, near)];
    const Segment& far_parent = graph.segments[rec.far_seg];
    const Eye eye = graph.camera.eye();
    const Sign sd = orient3d_eye(a, b, far_parent.p3[0], eye);
    const Sign sf = orient3d_eye(a, b, f, eye);
    if (sd == Sign::Zero || sf == Sign::Zero) throw DegenerateDepthTie{};
    const bool low_occluded = sd == sf;
    attach(graph, sid, far_child_low, 1, low_occluded ? IncidenceRole::FarOccluded
                                                      : IncidenceRole::FarFree);
    attach(graph, sid, far_child_high, 0, low_occluded ? IncidenceRole::FarFree
                                                       : IncidenceRole::FarOccluded);

    if (opts.split_near) {
      const auto [near_child_low, near_cut] = resolve(rec.near_seg, rec.near_scene_t);
      if (near_cut >= 0) {
        const int near_child_high = split_map[rec.near_seg].second[near_cut + 1];
        attach(graph, sid, near_child_low, 1, IncidenceRole::Near);
        attach(graph, sid, near_child_high, 0, IncidenceRole::Near);
      }
    } else {
      const auto [near_child, ignored] = resolve(rec.near_seg, rec.near_scene_t);
      (void)ignored;
      S.near_segment = near_child;
      S.near_t = rec.near_scene_t;
      if (auto it = split_map.find(rec.near_seg); it != split_map.end()) {
        // express the attachment parameter within the child
        const auto& [params, children] = it->second;
        int k = 0;
        while (k < static_cast<int>(params.size()) && params[k] < rec.near_scene_t) k++;
        const double lo = k == 0 ? 0.0 : params[k - 1];
        const double hi = k == static_cast<int>(params.size()) ? 1.0 : params[k];
        (void)children;
        S.near_t = hi > lo ? (rec.near_scene_t - lo) / (hi - lo) : 0.5;
      }
      graph.singularities[sid].incident.push_back({S.near_segment, -1, IncidenceRole::Near});
    }
    graph.counters.image_intersections++;
  }
}

std::string dump_view_graph(const ViewGraph& graph) {
  nlohmann::json doc;
  doc["schema"] = "vg-1";
  doc["method"] = graph.method;
  doc["mesh_hash"] = graph.mesh_hash;

  auto vec2 = [](const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); };
  auto vec3 = [](const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  auto link_json = [](const Link& l) -> nlohmann::json {
    switch (l.kind) {
      case Link::Kind::Free:
        return nullptr;
      case Link::Kind::Segment:
        return {{"segment", l.id}, {"end", l.other_end}};
      case Link::Kind::Singularity:
        return {{"singularity", l.id}};
    }
    return nullptr;
  };
  const char* type_names[] = {"contour", "boundary", "interpolated-contour"};
  const char* vis_names[] = {"unknown", "visible", "invisible"};
  const char* kind_names[] = {"image-space-intersection", "surface-intersection",
                              "contour-curtain-fold", "boundary-curtain-fold", "bifurcation"};
  const char* role_names[] = {"plain", "near", "far-occluded", "far-free"};

  doc["segments"] = nlohmann::json::array();
  for (int s = 0; s < static_cast<int>(graph.segments.size()); s++) {
    const Segment& seg = graph.segments[s];
    if (seg.replaced) continue;
    nlohmann::json j;
    j["id"] = s;
    j["type"] = type_names[static_cast<int>(seg.type)];
    j["p0"] = {{"image", vec2(seg.p2[0])}, {"scene", vec3(seg.p3[0])}};
    j["p1"] = {{"image", vec2(seg.p2[1])}, {"scene", vec3(seg.p3[1])}};
    j["head"] = link_json(seg.links[1]);
    j["tail"] = link_json(seg.links[0]);
    j["visibility"] = vis_names[static_cast<int>(seg.vis)];
    if (seg.qi >= 0) j["qi"] = seg.qi;
    nlohmann::json src;
    if (seg.mesh_edge >= 0) src["edge"] = seg.mesh_edge;
    if (seg.mesh_face >= 0) src["face"] = seg.mesh_face;
    if (seg.parent >= 0) {
      src["parent"] = seg.parent;
      src["range"] = {seg.t0, seg.t1};
    }
    j["source"] = src;
    doc["segments"].push_back(std::move(j));
  }

  doc["singularities"] = nlohmann::json::array();
  for (int i = 0; i < static_cast<int>(graph.singularities.size()); i++) {
    const Singularity& sing = graph.singularities[i];
    nlohmann::json j;
    j["id"] = i;
    j["kind"] = kind_names[static_cast<int>(sing.kind)];
    j["anchor"] = {{"image", vec2(sing.anchor2)}, {"scene", vec3(sing.anchor3)}};
    j["incident"] = nlohmann::json::array();
    for (const auto& inc : sing.incident) {
      j["incident"].push_back({{"segment", inc.segment},
                               {"end", inc.end},
                               {"role", role_names[static_cast<int>(inc.role)]}});
    }
    if (sing.kind == SingKind::ImageIntersection) {
      j["near_is_boundary"] = sing.near_is_boundary;
    }
    if (sing.kind == SingKind::SurfaceIntersection && sing.y_increment_audited) {
      j["y_increment"] = sing.qi_step;
    }
    j["qi_step"] = sing.qi_step;
    doc["singularities"].push_back(std::move(j));
  }

  doc["counters"] = {{"curtain_folds", graph.counters.curtain_folds},
                     {"surface_intersections", graph.counters.surface_intersections},
                     {"bifurcations", graph.counters.bifurcations},
                     {"image_intersections", graph.counters.image_intersections},
                     {"split_segments", graph.counters.split_segments}};
  return doc.dump(2);
}

}  // namespace contourline
