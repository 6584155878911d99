#include "contourline/visibility.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "contourline/errors.hpp"
#include "contourline/predicates.hpp"

namespace contourline {

namespace {

std::vector<int> exclusions_for(const ViewGraph& graph, const Segment& seg) {
  const Mesh& mesh = *graph.mesh;
  std::vector<int> out;
  if (seg.mesh_edge >= 0) {
    const auto& e = mesh.edges[seg.mesh_edge];
    out.push_back(e.f0);
    if (e.f1 >= 0) out.push_back(e.f1);
  } else if (seg.mesh_face >= 0) {
    // interpolated curves cut through faces; ignore the whole
    // vertex-neighborhood of the carrying face
    for (int v : mesh.faces[seg.mesh_face])
      for (int f : mesh.faces_of_vertex(v)) out.push_back(f);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

// chains of segments connected by plain links (no singularity in between)
std::vector<std::vector<int>> plain_chains(const ViewGraph& graph) {
  std::vector<std::vector<int>> chains;
  std::vector<char> claimed(graph.segments.size(), 0);
  for (int s0 = 0; s0 < static_cast<int>(graph.segments.size()); s0++) {
    if (claimed[s0] || graph.segments[s0].replaced) continue;
    // walk to one extremity (or detect a closed loop)
    int start = s0, from_end = 0;
    {
      int cur = s0, arriving = 1;  // walk out of the tail first
      while (true) {
        const Link& link = graph.segments[cur].links[1 - arriving];
        if (link.kind != Link::Kind::Segment) {
          start = cur;
          from_end = 1 - arriving;
          break;
        }
        if (link.id == s0) {  // closed loop
          start = s0;
          from_end = 0;
          break;
        }
        arriving = link.other_end;
        cur = link.id;
      }
    }
    std::vector<int> chain;
    int cur = start, entry = from_end;
    while (cur >= 0 && !claimed[cur]) {
      claimed[cur] = 1;
      chain.push_back(cur);
      const Link& link = graph.segments[cur].links[1 - entry];
      if (link.kind != Link::Kind::Segment) break;
      entry = link.other_end;
      cur = link.id;
    }
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace

int ray_test(const RayAccel& accel, const Mesh& mesh, const Camera& camera, const Vec3& p,
             std::span<const int> exclusions, VisibilityStats* stats) {
  (void)mesh;
  if (stats) stats->ray_tests++;
  return accel.count_occluders(p, camera.eye(), exclusions);
}

int ray_test_on_segment(const RayAccel& accel, const ViewGraph& graph, int segment, double t,
                        VisibilityStats* stats) {
  const Segment& seg = graph.segments[segment];
  const auto exclusions = exclusions_for(graph, seg);
  const double offsets[4] = {0.0, -0.125, 0.125, -0.25};
  for (int attempt = 0; attempt < 4; attempt++) {
    const double tt = std::clamp(t + offsets[attempt], 0.03125, 0.96875);
    const Vec3 p = seg.p3[0] + tt * (seg.p3[1] - seg.p3[0]);
    try {
      return ray_test(accel, *graph.mesh, graph.camera, p, exclusions, stats);
    } catch (const GrazingHit&) {
      if (stats) stats->grazing_retries++;
      if (attempt == 3) throw;
    }
  }
  return 0;  // unreachable
}

void mark_locally_invisible(ViewGraph& graph) {
  for (auto& seg : graph.segments) {
    if (seg.replaced) continue;
    if ((seg.type == CurveType::Contour && seg.concave) ||
        (seg.type == CurveType::Boundary && seg.backface_boundary)) {
      seg.vis = Visibility::Invisible;
      seg.qi_lower = std::max(seg.qi_lower, 1);
    }
  }
}

void propagate_visibility(ViewGraph& graph, const RayAccel& accel, PropagationMode mode,
                          VisibilityStats* stats) {
  if (mode == PropagationMode::PerSegment) {
    for (int s = 0; s < static_cast<int>(graph.segments.size()); s++) {
      Segment& seg = graph.segments[s];
      if (seg.replaced) continue;
      const int q = ray_test_on_segment(accel, graph, s, 0.5, stats);
      const Visibility vis = q == 0 ? Visibility::Visible : Visibility::Invisible;
      if (seg.vis == Visibility::Invisible && vis == Visibility::Visible)
        throw Error("ray test contradicts a local invisibility mark on segment " +
                    std::to_string(s));
      seg.vis = vis;
      seg.qi = q;
    }
    return;
  }

  for (const auto& chain : plain_chains(graph)) {
    bool any_unknown = false;
    for (int s : chain) any_unknown |= graph.segments[s].vis == Visibility::Unknown;
    if (!any_unknown) continue;  // already known invisible, skip the test
    const int mid = chain[chain.size() / 2];
    const int q = ray_test_on_segment(accel, graph, mid, 0.5, stats);
    const Visibility vis = q == 0 ? Visibility::Visible : Visibility::Invisible;
    for (int s : chain) {
      Segment& seg = graph.segments[s];
      if (seg.vis == Visibility::Invisible && vis == Visibility::Visible)
        throw Error("chain visibility contradicts a local invisibility mark");
      seg.vis = vis;
      if (stats && s != mid) stats->propagated_segments++;
    }
  }
}

void propagate_votes(ViewGraph& graph, const RayAccel& accel, int votes,
                     VisibilityStats* stats) {
  if (votes < 1) votes = 1;
  const Mesh& mesh = *graph.mesh;

  auto test_segment = [&](int s) -> int {
    const Segment& seg = graph.segments[s];
    if (seg.type != CurveType::InterpolatedContour)
      return ray_test_on_segment(accel, graph, s, 0.5, stats) == 0 ? 1 : 0;
    // probe the nearest-to-camera vertex of the carrying face
    const auto& tri = mesh.faces[seg.mesh_face];
    int best = tri[0];
    double best_depth = graph.camera.project(mesh.vertices[tri[0]]).depth;
    for (int k = 1; k < 3; k++) {
      const double d = graph.camera.project(mesh.vertices[tri[k]]).depth;
      if (d < best_depth) {
        best_depth = d;
        best = tri[k];
      }
    }
    const auto exclusions = exclusions_for(graph, seg);
    Vec3 p = mesh.vertices[best];
    for (int attempt = 0;; attempt++) {
      try {
        return ray_test(accel, mesh, graph.camera, p, exclusions, stats) == 0 ? 1 : 0;
      } catch (const GrazingHit&) {
        if (attempt >= 3) throw;
        if (stats) stats->grazing_retries++;
        p += (mesh.face_centroid(seg.mesh_face) - p) * 1e-3;
      }
    }
  };

  for (const auto& chain : plain_chains(graph)) {
    bool any_unknown = false;
    for (int s : chain) any_unknown |= graph.segments[s].vis == Visibility::Unknown;
    if (!any_unknown) continue;
    const int k = std::min<int>(votes, static_cast<int>(chain.size()));
    int yes = 0;
    for (int i = 0; i < k; i++)
      yes += test_segment(chain[static_cast<std::size_t>(i) * chain.size() / k]);
    const Visibility vis = 2 * yes > k ? Visibility::Visible : Visibility::Invisible;
    for (int s : chain) {
      Segment& seg = graph.segments[s];
      if (seg.vis != Visibility::Invisible) seg.vis = vis;
      if (stats) stats->propagated_segments++;
    }
  }
}

namespace {

struct Relation {
  int to;
  int delta;  // qi[to] = qi[from] + delta
};

struct QiSolver {
  ViewGraph& graph;
  const RayAccel& accel;
  VisibilityStats* stats;
  std::vector<std::vector<Relation>> adj;
  std::vector<int> component;
  std::vector<int> needs_direct;  // segments only resolvable by a ray test

  explicit QiSolver(ViewGraph& g, const RayAccel& a, VisibilityStats* st)
      : graph(g), accel(a), stats(st), adj(g.segments.size()) {}

  void relate(int u, int v, int delta) {
    if (u < 0 || v < 0 || u == v) return;
    adj[u].push_back({v, delta});
    adj[v].push_back({u, -delta});
  }

  void build() {
    for (int s = 0; s < static_cast<int>(graph.segments.size()); s++) {
      const Segment& seg = graph.segments[s];
      if (seg.replaced) continue;
      for (int end = 0; end < 2; end++)
        if (seg.links[end].kind == Link::Kind::Segment && seg.links[end].id > s)
          relate(s, seg.links[end].id, 0);
    }

    const Mesh& mesh = *graph.mesh;
    for (const auto& sing : graph.singularities) {
      switch (sing.kind) {
        case SingKind::ContourCurtainFold:
        case SingKind::BoundaryCurtainFold: {
          int near = -1, far = -1;
          for (const auto& inc : sing.incident) {
            if (inc.role == IncidenceRole::Near) near = inc.segment;
            if (inc.role == IncidenceRole::FarOccluded) far = inc.segment;
          }
          relate(near, far, sing.qi_step);
          break;
        }
        case SingKind::ImageIntersection: {
          const int step = sing.near_is_boundary ? 1 : 2;
          int near = sing.near_segment;
          std::vector<int> nears;
          for (const auto& inc : sing.incident)
            if (inc.role == IncidenceRole::Near && inc.end >= 0) nears.push_back(inc.segment);
          if (!nears.empty()) {
            for (std::size_t i = 1; i < nears.size(); i++) relate(nears[0], nears[i], 0);
            near = nears[0];
          }
          for (const auto& inc : sing.incident) {
            if (inc.role == IncidenceRole::FarOccluded) relate(near, inc.segment, step);
            if (inc.role == IncidenceRole::FarFree) relate(near, inc.segment, 0);
          }
          break;
        }
        case SingKind::SurfaceIntersection: {
          int base = -1;
          for (const auto& inc : sing.incident) {
            if (inc.role != IncidenceRole::Plain) continue;
            if (base < 0)
              base = inc.segment;
            else
              relate(base, inc.segment, 0);
          }
          for (const auto& inc : sing.incident)
            if (inc.role == IncidenceRole::FarOccluded) relate(base, inc.segment, sing.qi_step);
          break;
        }
        case SingKind::Bifurcation: {
          // pairs whose edges no one-ring face occludes share one QI; the
          // rest need their own ray test
          std::vector<int> clean;
          for (const auto& inc : sing.incident) {
            const Segment& seg = graph.segments[inc.segment];
            if (seg.mesh_edge < 0 || sing.mesh_vertex < 0) {
              needs_direct.push_back(inc.segment);
              continue;
            }
            const auto& e = mesh.edges[seg.mesh_edge];
            const int other = e.v0 == sing.mesh_vertex ? e.v1 : e.v0;
            int occ = 0;
            const Vec3& p = mesh.vertices[sing.mesh_vertex];
            const Eye eye = graph.camera.eye();
            for (int f : mesh.faces_of_vertex(sing.mesh_vertex)) {
              if (f == e.f0 || f == e.f1) continue;
              const auto& tri = mesh.faces[f];
              int q = -1, r = -1;
              for (int k = 0; k < 3; k++)
                if (tri[k] == sing.mesh_vertex) {
                  q = tri[(k + 1) % 3];
                  r = tri[(k + 2) % 3];
                }
              if (q == other || r == other) continue;
              try {
                if (edge_occluded_by_face(p, mesh.vertices[other], mesh.vertices[q],
                                          mesh.vertices[r], eye))
                  occ++;
              } catch (const ZeroOrientation&) {
                occ = -1;  // inconclusive
                break;
              }
            }
            if (occ == 0)
              clean.push_back(inc.segment);
            else
              needs_direct.push_back(inc.segment);
          }
          for (std::size_t i = 1; i < clean.size(); i++) relate(clean[0], clean[i], 0);
          break;
        }
      }
    }
  }

  // breadth-first assignment; returns false on any inconsistency
  bool assign_component(const std::vector<int>& members, int seed, int seed_qi) {
    std::deque<int> todo;
    graph.segments[seed].qi = seed_qi;
    todo.push_back(seed);
    bool ok = true;
    while (!todo.empty()) {
      const int u = todo.front();
      todo.pop_front();
      for (const auto& rel : adj[u]) {
        const int want = graph.segments[u].qi + rel.delta;
        Segment& v = graph.segments[rel.to];
        if (v.qi < 0) {
          v.qi = want;
          if (stats) stats->propagated_segments++;
          todo.push_back(rel.to);
        } else if (v.qi != want) {
          ok = false;
        }
      }
    }
    if (!ok) return false;
    for (int s : members) {
      const Segment& seg = graph.segments[s];
      if (seg.qi < 0 || seg.qi < seg.qi_lower) return false;
    }
    return true;
  }
};

}  // namespace

void propagate_qi(ViewGraph& graph, const RayAccel& accel, VisibilityStats* stats) {
  QiSolver solver(graph, accel, stats);
  solver.build();

  const int n = static_cast<int>(graph.segments.size());

  // connected components over the relation graph
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> members;
  for (int s = 0; s < n; s++) {
    if (comp[s] >= 0 || graph.segments[s].replaced) continue;
    const int c = static_cast<int>(members.size());
    members.emplace_back();
    std::deque<int> todo{s};
    comp[s] = c;
    while (!todo.empty()) {
      const int u = todo.front();
      todo.pop_front();
      members[c].push_back(u);
      for (const auto& rel : solver.adj[u])
        if (comp[rel.to] < 0) {
          comp[rel.to] = c;
          todo.push_back(rel.to);
        }
    }
  }

  // the image-space bounding box of the scene must be visible
  std::vector<int> extremal;
  {
    double best[4] = {0, 0, 0, 0};
    int best_seg[4] = {-1, -1, -1, -1};
    for (int s = 0; s < n; s++) {
      if (graph.segments[s].replaced) continue;
      for (int end = 0; end < 2; end++) {
        const Vec2& p = graph.segments[s].p2[end];
        const double vals[4] = {p.x(), -p.x(), p.y(), -p.y()};
        for (int k = 0; k < 4; k++) {
          if (best_seg[k] < 0 || vals[k] > best[k]) {
            best[k] = vals[k];
            best_seg[k] = s;
          }
        }
      }
    }
    for (int k = 0; k < 4; k++)
      if (best_seg[k] >= 0) extremal.push_back(best_seg[k]);
  }

  std::vector<char> seeded(members.size(), 0);
  std::vector<int> seed_of(members.size(), -1);
  std::vector<int> seed_qi(members.size(), 0);
  for (int s : extremal) {
    if (!seeded[comp[s]]) {
      seeded[comp[s]] = 1;
      seed_of[comp[s]] = s;
      seed_qi[comp[s]] = 0;
    }
  }

  // segments flagged unresolvable by overlap tests get direct ray tests
  std::sort(solver.needs_direct.begin(), solver.needs_direct.end());
  solver.needs_direct.erase(
      std::unique(solver.needs_direct.begin(), solver.needs_direct.end()),
      solver.needs_direct.end());
  for (int s : solver.needs_direct) graph.segments[s].qi = ray_test_on_segment(accel, graph, s, 0.5, stats);

  for (int c = 0; c < static_cast<int>(members.size()); c++) {
    int seed = seed_of[c];
    int qi0 = seed_qi[c];
    if (seed < 0) {
      // prefer a segment already pinned by a direct test
      for (int s : members[c])
        if (graph.segments[s].qi >= 0) {
          seed = s;
          qi0 = graph.segments[s].qi;
          break;
        }
    }
    if (seed < 0) {
      seed = members[c][members[c].size() / 2];
      qi0 = ray_test_on_segment(accel, graph, seed, 0.5, stats);
    }
    bool ok = solver.assign_component(members[c], seed, qi0);
    if (ok) {
      for (int s : members[c])
        if (graph.segments[s].qi < 0) ok = false;
    }
    if (ok) {
      // every extremal segment of this component must have come out visible
      for (int s : extremal)
        if (comp[s] == c && graph.segments[s].qi != 0) ok = false;
    }
    if (!ok) {
      if (stats) stats->qi_conflicts++;
      for (int s : members[c])
        graph.segments[s].qi = ray_test_on_segment(accel, graph, s, 0.5, stats);
    }
  }

  for (int s = 0; s < n; s++) {
    Segment& seg = graph.segments[s];
    if (seg.replaced) continue;
    if (seg.qi < 0) throw UnresolvedVisibility{};
    seg.vis = seg.qi == 0 ? Visibility::Visible : Visibility::Invisible;
  }
}

std::vector<std::vector<Vec2>> visible_polylines(const ViewGraph& graph) {
  for (const auto& seg : graph.segments)
    if (!seg.replaced && seg.vis == Visibility::Unknown) throw UnresolvedVisibility{};

  // singularity continuations: the incident visible segment anchored at the
  // same point, when it is unique
  auto continue_through = [&](int sing, int seg, int end) -> std::pair<int, int> {
    const auto& s = graph.singularities[sing];
    int found = -1, found_end = -1, count = 0;
    for (const auto& inc : s.incident) {
      if (inc.end < 0 || (inc.segment == seg && inc.end == end)) continue;
      if (graph.segments[inc.segment].vis != Visibility::Visible) continue;
      found = inc.segment;
      found_end = inc.end;
      count++;
    }
    return count == 1 ? std::make_pair(found, found_end) : std::make_pair(-1, -1);
  };

  std::vector<std::vector<Vec2>> out;
  std::vector<char> claimed(graph.segments.size(), 0);
  for (int s0 = 0; s0 < static_cast<int>(graph.segments.size()); s0++) {
    if (claimed[s0] || graph.segments[s0].replaced) continue;
    if (graph.segments[s0].vis != Visibility::Visible) continue;

    // gather the run in both directions
    std::vector<std::pair<int, int>> run;  // (segment, orientation: 0 = tail->head)
    auto extend = [&](int start, int start_entry, bool forward) {
      int cur = start, entry = start_entry;
      while (true) {
        const Link& link = graph.segments[cur].links[1 - entry];
        int next = -1, next_end = -1;
        if (link.kind == Link::Kind::Segment) {
          next = link.id;
          next_end = link.other_end;
        } else if (link.kind == Link::Kind::Singularity) {
          std::tie(next, next_end) = continue_through(link.id, cur, 1 - entry);
        }
        if (next < 0 || claimed[next] ||
            graph.segments[next].vis != Visibility::Visible)
          break;
        claimed[next] = 1;
        if (forward)
          run.emplace_back(next, next_end);
        else
          run.insert(run.begin(), {next, 1 - next_end});
        entry = next_end;
        cur = next;
      }
    };

    claimed[s0] = 1;
    run.emplace_back(s0, 0);
    extend(s0, 0, true);
    extend(s0, 1, false);

    std::vector<Vec2> poly;
    for (std::size_t i = 0; i < run.size(); i++) {
      const auto [seg, ori] = run[i];
      const Vec2& a = graph.segments[seg].p2[ori];
      const Vec2& b = graph.segments[seg].p2[1 - ori];
      if (i == 0) poly.push_back(a);
      poly.push_back(b);
    }
    out.push_back(std::move(poly));
  }
  return out;
}

}  // namespace contourline
