#include "contourline/interpolated.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "contourline/bvh.hpp"
#include "contourline/camera.hpp"
#include "contourline/errors.hpp"

namespace contourline {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double tip_angle(const Vec3& at, const Vec3& p, const Vec3& q) {
  const Vec3 u = (p - at).normalized();
  const Vec3 v = (q - at).normalized();
  return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

Vec3 view_vector(const Camera& camera, const Vec3& p) {
  return camera.kind() == Camera::Kind::Perspective ? Vec3(p - camera.center())
                                                    : camera.direction();
}

}  // namespace

VertexField vertex_normals(const Mesh& mesh) {
  VertexField field;
  field.normals.assign(mesh.vertices.size(), Vec3::Zero());
  for (std::size_t f = 0; f < mesh.faces.size(); f++) {
    const auto& tri = mesh.faces[f];
    const double area = triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                      mesh.vertices[tri[2]]);
    for (int v : tri) field.normals[v] += area * mesh.face_normals[f];
  }
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); v++) {
    double len = field.normals[v].norm();
    if (len < 1e-300) {
      // canceling fan; retry with tip-angle weights
      Vec3 n = Vec3::Zero();
      for (int f : mesh.faces_of_vertex(v)) {
        const auto& tri = mesh.faces[f];
        int k = 0;
        while (tri[k] != v) k++;
        const double w = tip_angle(mesh.vertices[v], mesh.vertices[tri[(k + 1) % 3]],
                                   mesh.vertices[tri[(k + 2) % 3]]);
        n += w * mesh.face_normals[f];
      }
      len = n.norm();
      if (len < 1e-300) throw ZeroNormal(v);
      field.normals[v] = n / len;
    } else {
      field.normals[v] /= len;
    }
  }
  return field;
}

void compute_orientation(const Mesh& mesh, const Camera& camera, VertexField& field) {
  field.g.resize(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); v++)
    field.g[v] = view_vector(camera, mesh.vertices[v]).dot(field.normals[v]);
}

void compute_radial_curvature(const Mesh& mesh, const Camera& camera, VertexField& field) {
  const int nv = static_cast<int>(mesh.vertices.size());
  field.radial_curvature.assign(nv, 0.0);
  field.radial_reliable.assign(nv, 1);

  std::vector<int> ring;
  std::unordered_set<int> seen;
  for (int v = 0; v < nv; v++) {
    const Vec3& p = mesh.vertices[v];
    const Vec3& n = field.normals[v];
    Vec3 e1 = n.cross(std::fabs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX()).normalized();
    Vec3 e2 = n.cross(e1);

    // 2-ring neighborhood
    ring.clear();
    seen.clear();
    seen.insert(v);
    for (int e : mesh.edges_of_vertex(v)) {
      const auto& edge = mesh.edges[e];
      const int w = edge.v0 == v ? edge.v1 : edge.v0;
      if (seen.insert(w).second) ring.push_back(w);
    }
    const std::size_t one_ring_end = ring.size();
    for (std::size_t i = 0; i < one_ring_end; i++) {
      for (int e : mesh.edges_of_vertex(ring[i])) {
        const auto& edge = mesh.edges[e];
        const int w = edge.v0 == ring[i] ? edge.v1 : edge.v0;
        if (seen.insert(w).second) ring.push_back(w);
      }
    }

    // least-squares symmetric shape operator S: S * du = dn in tangent coords
    Eigen::MatrixXd A(2 * ring.size(), 3);
    Eigen::VectorXd rhs(2 * ring.size());
    for (std::size_t i = 0; i < ring.size(); i++) {
      const Vec3 dp = mesh.vertices[ring[i]] - p;
      const Vec3 dn = field.normals[ring[i]] - n;
      const double u1 = dp.dot(e1), u2 = dp.dot(e2);
      const double d1 = dn.dot(e1), d2 = dn.dot(e2);
      A(2 * i, 0) = u1;
      A(2 * i, 1) = u2;
      A(2 * i, 2) = 0;
      rhs(2 * i) = d1;
      A(2 * i + 1, 0) = 0;
      A(2 * i + 1, 1) = u1;
      A(2 * i + 1, 2) = u2;
      rhs(2 * i + 1) = d2;
    }
    const Eigen::Vector3d abc = A.colPivHouseholderQr().solve(rhs);
    Eigen::Matrix2d S;
    S << abc(0), abc(1), abc(1), abc(2);

    const Vec3 view = view_vector(camera, p);
    const Vec3 w3 = view - view.dot(n) * n;  // projection into the tangent plane
    if (w3.norm() < 1e-10 * view.norm()) {
      // view along the normal: no radial direction; blend of the principal
      // curvatures (the rotational average) stands in, flagged unreliable
      field.radial_curvature[v] = 0.5 * (S(0, 0) + S(1, 1));
      field.radial_reliable[v] = 0;
      continue;
    }
    Eigen::Vector2d w2(w3.dot(e1), w3.dot(e2));
    w2.normalize();
    field.radial_curvature[v] = w2.dot(S * w2);
  }
}

InterpolatedCurve extract_interpolated(const Mesh& mesh, const Camera& camera,
                                       const VertexField& field) {
  InterpolatedCurve curve;
  if (field.g.size() != mesh.vertices.size())
    throw Error("orientation function not computed for this camera");
  for (double gv : field.g)
    if (gv == 0.0) throw DegenerateGeometry("orientation function vanishes at a vertex");
  (void)camera;

  // crossing point per mesh edge, shared by both adjacent faces
  std::unordered_map<int, InterpolatedCurve::Endpoint> crossings;
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++) {
    const auto& edge = mesh.edges[e];
    const double gi = field.g[edge.v0];
    const double gj = field.g[edge.v1];
    if ((gi > 0) == (gj > 0)) continue;
    InterpolatedCurve::Endpoint pt;
    pt.edge = e;
    pt.t = gi / (gi - gj);
    pt.position = (1.0 - pt.t) * mesh.vertices[edge.v0] + pt.t * mesh.vertices[edge.v1];
    crossings.emplace(e, pt);
  }

  std::unordered_map<int, std::array<int, 2>> edge_segments;  // crossed edge -> up to 2 seg ids
  for (int f = 0; f < static_cast<int>(mesh.faces.size()); f++) {
    int crossed[3], n = 0;
    for (int e : mesh.face_edges[f])
      if (crossings.count(e)) crossed[n++] = e;
    if (n == 0) continue;
    if (n != 2) throw Error("face " + std::to_string(f) + " has " + std::to_string(n) +
                            " contour crossings");
    InterpolatedCurve::FaceSegment seg;
    seg.face = f;
    seg.a = crossings[crossed[0]];
    seg.b = crossings[crossed[1]];
    const int id = static_cast<int>(curve.segments.size());
    curve.segments.push_back(seg);
    for (int e : {crossed[0], crossed[1]}) {
      auto [it, fresh] = edge_segments.try_emplace(e, std::array<int, 2>{-1, -1});
      auto& slots = it->second;
      (void)fresh;
      if (slots[0] < 0)
        slots[0] = id;
      else if (slots[1] < 0)
        slots[1] = id;
      else
        throw Error("contour crossing shared by more than two faces");
    }
  }

  // chain across shared crossed edges into loops or boundary-to-boundary runs
  std::vector<char> claimed(curve.segments.size(), 0);
  auto neighbor = [&](int seg, int via_edge) -> int {
    const auto it = edge_segments.find(via_edge);
    const auto& slots = it->second;
    if (slots[0] == seg) return slots[1];
    return slots[0] == -1 ? -1 : (slots[1] == seg ? slots[0] : -1);
  };
  for (int s0 = 0; s0 < static_cast<int>(curve.segments.size()); s0++) {
    if (claimed[s0]) continue;
    // walk backward to a free end (or around the loop)
    int start = s0;
    int in_edge = curve.segments[s0].a.edge;
    bool closed = false;
    {
      int cur = s0;
      int via = curve.segments[s0].a.edge;
      while (true) {
        const int prev = neighbor(cur, via);
        if (prev < 0) {
          start = cur;
          in_edge = via;
          break;
        }
        if (prev == s0) {
          closed = true;
          start = s0;
          in_edge = curve.segments[s0].a.edge;
          break;
        }
        via = curve.segments[prev].a.edge == via ? curve.segments[prev].b.edge
                                                 : curve.segments[prev].a.edge;
        cur = prev;
      }
    }
    std::vector<int> chain;
    int cur = start;
    int entry = in_edge;
    while (cur >= 0 && !claimed[cur]) {
      claimed[cur] = 1;
      chain.push_back(cur);
      const auto& seg = curve.segments[cur];
      const int out_edge = seg.a.edge == entry ? seg.b.edge : seg.a.edge;
      const int next = neighbor(cur, out_edge);
      entry = out_edge;
      cur = next;
    }
    curve.chains.push_back(std::move(chain));
    curve.chain_closed.push_back(closed ? 1 : 0);
  }
  return curve;
}

void interpolated_curtain_folds(InterpolatedCurve& curve, const Mesh& mesh,
                                const VertexField& field) {
  curve.curtain_folds.clear();
  if (field.radial_curvature.size() != mesh.vertices.size())
    throw Error("radial curvature not computed");

  for (int s = 0; s < static_cast<int>(curve.segments.size()); s++) {
    const auto& seg = curve.segments[s];
    const auto& tri = mesh.faces[seg.face];
    const double k0 = field.radial_curvature[tri[0]];
    const double k1 = field.radial_curvature[tri[1]];
    const double k2 = field.radial_curvature[tri[2]];
    const bool mixed = ((k0 > 0) != (k1 > 0)) || ((k0 > 0) != (k2 > 0));
    if (!mixed) continue;

    // kr = 0 chord endpoints on the face edges, interpolated linearly
    Vec3 chord[2];
    int n = 0;
    const double kv[3] = {k0, k1, k2};
    for (int k = 0; k < 3 && n < 2; k++) {
      const double ka = kv[k];
      const double kb = kv[(k + 1) % 3];
      if ((ka > 0) == (kb > 0)) continue;
      const double t = ka / (ka - kb);
      chord[n++] = (1.0 - t) * mesh.vertices[tri[k]] + t * mesh.vertices[tri[(k + 1) % 3]];
    }
    if (n != 2) continue;

    // intersect the two in-face chords in the plane of the face
    const Vec3 origin = seg.a.position;
    const Vec3 du = seg.b.position - seg.a.position;
    Vec3 axis1 = du;
    const double len = axis1.norm();
    if (len < 1e-300) continue;
    axis1 /= len;
    const Vec3 fn = mesh.face_normals[seg.face];
    const Vec3 axis2 = fn.cross(axis1);
    auto to2d = [&](const Vec3& p) {
      return Vec2((p - origin).dot(axis1), (p - origin).dot(axis2));
    };
    const Vec2 a2(0, 0), b2(len, 0);
    const Vec2 c2 = to2d(chord[0]);
    const Vec2 d2 = to2d(chord[1]);
    const Vec2 r = b2 - a2, q = d2 - c2, w = c2 - a2;
    const double denom = r.x() * q.y() - r.y() * q.x();
    if (denom == 0.0) continue;
    const double tseg = (w.x() * q.y() - w.y() * q.x()) / denom;
    const double tchord = (w.x() * r.y() - w.y() * r.x()) / denom;
    if (tseg <= 0.0 || tseg >= 1.0 || tchord < 0.0 || tchord > 1.0) continue;

    InterpolatedCurve::FoldMarker marker;
    marker.segment = s;
    marker.t = tseg;
    marker.position = seg.a.position + tseg * du;
    curve.curtain_folds.push_back(marker);
  }
}

std::vector<std::uint8_t> interpolated_visibility(const InterpolatedCurve& curve,
                                                  const Mesh& mesh, const Camera& camera,
                                                  const RayAccel& accel, int votes_per_chain,
                                                  VoteStats* stats) {
  std::vector<std::uint8_t> visible(curve.segments.size(), 0);
  if (votes_per_chain < 1) votes_per_chain = 1;

  // fold markers split chains into sub-chains of constant visibility
  std::unordered_map<int, int> folds_on_segment;
  for (const auto& m : curve.curtain_folds) folds_on_segment[m.segment]++;

  const Eye eye = camera.eye();
  std::vector<int> exclude;
  auto vote_for_face = [&](int face) -> int {
    // test point: the face vertex nearest the camera; ignore the whole
    // vertex-adjacent neighborhood of the face so the fan cannot self-occlude
    const auto& tri = mesh.faces[face];
    int best = tri[0];
    double best_depth = camera.project(mesh.vertices[tri[0]]).depth;
    for (int k = 1; k < 3; k++) {
      const double d = camera.project(mesh.vertices[tri[k]]).depth;
      if (d < best_depth) {
        best_depth = d;
        best = tri[k];
      }
    }
    exclude.clear();
    for (int v : tri)
      for (int f : mesh.faces_of_vertex(v)) exclude.push_back(f);
    std::sort(exclude.begin(), exclude.end());
    exclude.erase(std::unique(exclude.begin(), exclude.end()), exclude.end());

    Vec3 p = mesh.vertices[best];
    for (int attempt = 0;; attempt++) {
      try {
        if (stats) stats->ray_tests++;
        return accel.count_occluders(p, eye, exclude) == 0 ? 1 : 0;
      } catch (const GrazingHit&) {
        if (attempt >= 3) throw;
        if (stats) stats->grazing_retries++;
        p += (mesh.face_centroid(face) - p) * 1e-3;
      }
    }
  };

  for (const auto& chain : curve.chains) {
    // split at fold markers
    std::vector<std::vector<int>> subchains;
    std::vector<int> current;
    for (int seg : chain) {
      current.push_back(seg);
      if (folds_on_segment.count(seg)) {
        subchains.push_back(current);
        current.clear();
        current.push_back(seg);  // the far half of the split segment
      }
    }
    if (!current.empty()) subchains.push_back(current);

    for (const auto& sub : subchains) {
      const int votes = std::min<int>(votes_per_chain, static_cast<int>(sub.size()));
      int yes = 0, cast = 0;
      for (int k = 0; k < votes; k++) {
        const int idx = sub[static_cast<std::size_t>(k) * sub.size() / votes];
        yes += vote_for_face(curve.segments[idx].face);
        cast++;
      }
      const bool vis = 2 * yes > cast;
      for (int seg : sub) visible[seg] = visible[seg] || vis;
    }
  }
  return visible;
}

}  // namespace contourline
