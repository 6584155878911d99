#include "contourline/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "contourline/camera.hpp"
#include "contourline/errors.hpp"
#include "contourline/predicates.hpp"

namespace contourline {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<int, int>& p) const {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(p.first) << 32) ^
                                      static_cast<std::uint64_t>(p.second));
  }
};

Vec3 face_normal(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
  return (p1 - p0).cross(p2 - p0);
}

void build_adjacency(Mesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nf = static_cast<int>(mesh.faces.size());

  std::unordered_map<std::pair<int, int>, int, PairHash> edge_index;
  edge_index.reserve(nf * 3);
  mesh.edges.clear();
  mesh.face_edges.assign(nf, {-1, -1, -1});

  for (int f = 0; f < nf; f++) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; k++) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (a == b) throw NonManifoldError("face " + std::to_string(f) + " repeats a vertex");
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = edge_index.find(key);
      if (it == edge_index.end()) {
        Mesh::Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.f0 = f;
        const int id = static_cast<int>(mesh.edges.size());
        mesh.edges.push_back(e);
        edge_index.emplace(key, id);
        mesh.face_edges[f][k] = id;
      } else {
        Mesh::Edge& e = mesh.edges[it->second];
        if (e.f1 >= 0)
          throw NonManifoldError("edge (" + std::to_string(key.first) + "," +
                                 std::to_string(key.second) + ") touches more than 2 faces");
        e.f1 = f;
        mesh.face_edges[f][k] = it->second;
      }
    }
  }

  mesh.boundary_edge_count = 0;
  for (const auto& e : mesh.edges)
    if (e.f1 < 0) mesh.boundary_edge_count++;

  // CSR vertex -> edges
  mesh.vertex_edge_offsets.assign(nv + 1, 0);
  for (const auto& e : mesh.edges) {
    mesh.vertex_edge_offsets[e.v0 + 1]++;
    mesh.vertex_edge_offsets[e.v1 + 1]++;
  }
  for (int v = 0; v < nv; v++) mesh.vertex_edge_offsets[v + 1] += mesh.vertex_edge_offsets[v];
  mesh.vertex_edge_items.assign(mesh.vertex_edge_offsets.back(), -1);
  {
    std::vector<int> cursor(mesh.vertex_edge_offsets.begin(), mesh.vertex_edge_offsets.end() - 1);
    for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++) {
      mesh.vertex_edge_items[cursor[mesh.edges[e].v0]++] = e;
      mesh.vertex_edge_items[cursor[mesh.edges[e].v1]++] = e;
    }
  }

  // CSR vertex -> faces
  mesh.vertex_face_offsets.assign(nv + 1, 0);
  for (const auto& tri : mesh.faces)
    for (int v : tri) mesh.vertex_face_offsets[v + 1]++;
  for (int v = 0; v < nv; v++) mesh.vertex_face_offsets[v + 1] += mesh.vertex_face_offsets[v];
  mesh.vertex_face_items.assign(mesh.vertex_face_offsets.back(), -1);
  {
    std::vector<int> cursor(mesh.vertex_face_offsets.begin(), mesh.vertex_face_offsets.end() - 1);
    for (int f = 0; f < nf; f++)
      for (int v : mesh.faces[f]) mesh.vertex_face_items[cursor[v]++] = f;
  }
}

// Faces incident to each vertex must form a single fan, open or closed.
// Rejects bowtie vertices (two fans joined only through the vertex).
void check_vertex_fans(const Mesh& mesh) {
  const int nv = static_cast<int>(mesh.vertices.size());
  std::unordered_map<int, int> local;  // face id -> local index
  for (int v = 0; v < nv; v++) {
    const auto faces = mesh.faces_of_vertex(v);
    if (faces.empty()) continue;
    local.clear();
    for (int i = 0; i < static_cast<int>(faces.size()); i++) local[faces[i]] = i;

    // union faces that share an incident interior edge at v
    std::vector<int> parent(faces.size());
    for (std::size_t i = 0; i < parent.size(); i++) parent[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    int boundary_here = 0;
    for (int e : mesh.edges_of_vertex(v)) {
      const auto& edge = mesh.edges[e];
      if (edge.f1 < 0) {
        boundary_here++;
        continue;
      }
      const int a = find(local.at(edge.f0));
      const int b = find(local.at(edge.f1));
      if (a != b) parent[a] = b;
    }
    int components = 0;
    for (std::size_t i = 0; i < parent.size(); i++)
      if (find(static_cast<int>(i)) == static_cast<int>(i)) components++;
    if (components > 1 || boundary_here > 2)
      throw NonManifoldError("vertex " + std::to_string(v) + " joins multiple face fans");
  }
}

// Two faces are winding-consistent when they traverse their shared edge in
// opposite directions.
bool consistent_pair(const Mesh& mesh, int edge) {
  const auto& e = mesh.edges[edge];
  return mesh.face_traverses_forward(e.f0, edge) != mesh.face_traverses_forward(e.f1, edge);
}

int reorient_components(Mesh& mesh) {
  const int nf = static_cast<int>(mesh.faces.size());
  std::vector<signed char> state(nf, 0);  // 0 unseen, 1 keep, -1 flip
  std::vector<int> stack;
  int flipped_components = 0;
  for (int start = 0; start < nf; start++) {
    if (state[start] != 0) continue;
    state[start] = 1;
    stack.push_back(start);
    bool any_flip = false;
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int e : mesh.face_edges[f]) {
        const auto& edge = mesh.edges[e];
        const int g = edge.f0 == f ? edge.f1 : edge.f0;
        if (g < 0) continue;
        const bool same_winding =
            mesh.face_traverses_forward(edge.f0, e) == mesh.face_traverses_forward(edge.f1, e);
        const signed char want = same_winding ? -state[f] : state[f];
        if (state[g] == 0) {
          state[g] = want;
          if (want < 0) any_flip = true;
          stack.push_back(g);
        } else if (state[g] != want) {
          throw OrientationError("mesh component is not orientable");
        }
      }
    }
    if (any_flip) flipped_components++;
  }
  for (int f = 0; f < nf; f++)
    if (state[f] < 0) std::swap(mesh.faces[f][1], mesh.faces[f][2]);
  return flipped_components;
}

void compute_normals(Mesh& mesh) {
  mesh.face_normals.resize(mesh.faces.size());
  mesh.degenerate_face_count = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); f++) {
    const auto& tri = mesh.faces[f];
    Vec3 n = face_normal(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    const double len = n.norm();
    if (len == 0.0) {
      mesh.degenerate_face_count++;
      mesh.face_normals[f] = Vec3::Zero();
    } else {
      mesh.face_normals[f] = n / len;
    }
  }
}

}  // namespace

Mesh Mesh::from_data(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces,
                     bool allow_reorient) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.faces = std::move(faces);
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const auto& tri : mesh.faces)
    for (int v : tri)
      if (v < 0 || v >= nv) throw Error("face references vertex " + std::to_string(v));

  build_adjacency(mesh);
  check_vertex_fans(mesh);

  bool consistent = true;
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++) {
    if (mesh.edges[e].f1 < 0) continue;
    if (!consistent_pair(mesh, e)) {
      consistent = false;
      break;
    }
  }
  if (!consistent) {
    if (!allow_reorient) throw OrientationError("inconsistent face winding (use allow-reorient)");
    reorient_components(mesh);
    build_adjacency(mesh);  // face_edges order depends on winding
  }

  compute_normals(mesh);
  return mesh;
}

int Mesh::opposite_vertex(int face, int edge) const {
  const auto& tri = faces[face];
  const auto& e = edges[edge];
  for (int v : tri)
    if (v != e.v0 && v != e.v1) return v;
  return -1;
}

bool Mesh::face_traverses_forward(int face, int edge) const {
  const auto& tri = faces[face];
  const auto& e = edges[edge];
  for (int k = 0; k < 3; k++)
    if (tri[k] == e.v0 && tri[(k + 1) % 3] == e.v1) return true;
  return false;
}

int Mesh::edge_between(int va, int vb) const {
  const int lo = std::min(va, vb), hi = std::max(va, vb);
  for (int e : edges_of_vertex(lo)) {
    if (edges[e].v0 == lo && edges[e].v1 == hi) return e;
  }
  return -1;
}

Vec3 Mesh::face_centroid(int face) const {
  const auto& tri = faces[face];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh::bbox_diagonal() const {
  if (vertices.empty()) return 0.0;
  Vec3 lo = vertices[0], hi = vertices[0];
  for (const auto& p : vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::uint64_t Mesh::content_hash() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; i++) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : vertices) mix(p.data(), 3 * sizeof(double));
  for (const auto& tri : faces) mix(tri.data(), 3 * sizeof(int));
  return h;
}

Mesh load_obj(std::istream& in, const ObjOptions& opts, LoadReport* report) {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  LoadReport rep;

  std::string line;
  int lineno = 0;
  std::vector<int> poly;
  while (std::getline(in, line)) {
    lineno++;
    std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;

    std::istringstream ls(line.substr(start));
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError(lineno, "bad vertex record");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      poly.clear();
      std::string tok;
      while (ls >> tok) {
        // index, optionally followed by /vt or //vn suffixes
        std::size_t slash = tok.find('/');
        const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int idx = 0;
        try {
          idx = std::stoi(head);
        } catch (...) {
          throw ParseError(lineno, "bad face index '" + tok + "'");
        }
        if (idx <= 0 || idx > static_cast<int>(vertices.size()))
          throw ParseError(lineno, "face index " + std::to_string(idx) + " out of range");
        poly.push_back(idx - 1);
      }
      if (poly.size() < 3) throw ParseError(lineno, "face needs at least 3 vertices");
      if (poly.size() == 3) {
        faces.push_back({poly[0], poly[1], poly[2]});
      } else if (!opts.triangulate_polygons) {
        throw ParseError(lineno, "non-triangular face");
      } else {
        // fan around the lowest vertex index, preserving cyclic orientation
        const int n = static_cast<int>(poly.size());
        int anchor = 0;
        for (int i = 1; i < n; i++)
          if (poly[i] < poly[anchor]) anchor = i;
        for (int i = 1; i + 1 < n; i++) {
          faces.push_back(
              {poly[anchor], poly[(anchor + i) % n], poly[(anchor + i + 1) % n]});
          rep.triangulated_faces++;
        }
      }
    } else {
      rep.skipped_records++;
    }
  }

  Mesh mesh;
  try {
    mesh = Mesh::from_data(std::move(vertices), std::move(faces), opts.allow_reorient);
  } catch (const NonManifoldError&) {
    rep.manifold = false;
    if (report) *report = rep;
    throw;
  } catch (const OrientationError&) {
    rep.orientable = false;
    if (report) *report = rep;
    throw;
  }
  rep.boundary_edges = mesh.boundary_edge_count;
  rep.degenerate_faces = mesh.degenerate_face_count;
  if (report) *report = rep;
  return mesh;
}

Mesh load_obj_file(const std::string& path, const ObjOptions& opts, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_obj(in, opts, report);
}

Mesh perturb_generic(const Mesh& mesh, double magnitude, std::uint64_t seed) {
  Mesh out = mesh;
  if (magnitude <= 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-magnitude, magnitude);
  for (auto& p : out.vertices) {
    p.x() += noise(rng);
    p.y() += noise(rng);
    p.z() += noise(rng);
  }
  compute_normals(out);
  return out;
}

Facing face_facing(const Mesh& mesh, const Camera& camera, int face) {
  const auto& tri = mesh.faces[face];
  const Sign s = front_side(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]],
                            camera.eye());
  if (s == Sign::Zero) throw DegenerateFacing(face);
  return s == Sign::Positive ? Facing::Front : Facing::Back;
}

EdgeConvexity edge_convexity(const Mesh& mesh, int edge) {
  const auto& e = mesh.edges[edge];
  if (e.f1 < 0) throw Error("edge convexity is undefined on the boundary");
  // Orient the edge as a->b with the first face traversing it forward so the
  // two faces are abd and bae.
  int fa = e.f0, fb = e.f1;
  if (!mesh.face_traverses_forward(fa, edge)) std::swap(fa, fb);
  // fa = triangle abd (traverses a->b), fb = triangle bae
  const Vec3& a = mesh.vertices[e.v0];
  const Vec3& b = mesh.vertices[e.v1];
  const Vec3& d = mesh.vertices[mesh.opposite_vertex(fa, edge)];
  const Vec3& ee = mesh.vertices[mesh.opposite_vertex(fb, edge)];
  const Sign s = front_side(a, b, d, ee);
  if (s == Sign::Zero) throw CoplanarFaces(edge);
  return s == Sign::Positive ? EdgeConvexity::Concave : EdgeConvexity::Convex;
}

}  // namespace contourline
