#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "contourline/types.hpp"

namespace contourline {

class Camera;

enum class Facing { Front, Back };
enum class EdgeConvexity { Convex, Concave };

/// Indexed triangle mesh with edge adjacency. Immutable after construction;
/// all queries are read-only and safe to run concurrently.
struct Mesh {
  struct Edge {
    int v0 = -1, v1 = -1;  ///< canonical order, v0 < v1
    int f0 = -1, f1 = -1;  ///< adjacent faces; f1 < 0 on the boundary
  };

  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;  ///< counter-clockwise vertex triples
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> face_edges;  ///< edge ids opposite nothing in particular;
                                               ///< entry k is the edge (v[k], v[k+1])
  std::vector<Vec3> face_normals;              ///< unit normals

  // CSR incidence: vertex -> edges / faces
  std::vector<int> vertex_edge_offsets, vertex_edge_items;
  std::vector<int> vertex_face_offsets, vertex_face_items;

  int boundary_edge_count = 0;
  int degenerate_face_count = 0;  ///< exactly zero-area faces (cured by perturbation)

  /// Builds adjacency and validates manifoldness and orientability.
  /// `allow_reorient` flips whole components with inconsistent winding
  /// instead of failing.
  static Mesh from_data(std::vector<Vec3> vertices, std::vector<std::array<int, 3>> faces,
                        bool allow_reorient = false);

  bool is_boundary_edge(int e) const { return edges[e].f1 < 0; }
  int interior_edge_count() const { return static_cast<int>(edges.size()) - boundary_edge_count; }

  std::span<const int> edges_of_vertex(int v) const {
    return {vertex_edge_items.data() + vertex_edge_offsets[v],
            vertex_edge_items.data() + vertex_edge_offsets[v + 1]};
  }
  std::span<const int> faces_of_vertex(int v) const {
    return {vertex_face_items.data() + vertex_face_offsets[v],
            vertex_face_items.data() + vertex_face_offsets[v + 1]};
  }

  /// Vertex of `face` that is not on `edge`.
  int opposite_vertex(int face, int edge) const;
  /// True if `face` lists the directed edge v0->v1 of `edge` in its cycle.
  bool face_traverses_forward(int face, int edge) const;
  /// Edge id between two vertices, or -1.
  int edge_between(int va, int vb) const;

  Vec3 face_centroid(int face) const;
  double bbox_diagonal() const;
  std::uint64_t content_hash() const;
};

struct ObjOptions {
  bool triangulate_polygons = true;  ///< fan-triangulate quads+; otherwise reject them
  bool allow_reorient = false;
};

struct LoadReport {
  bool manifold = true;
  bool orientable = true;
  int boundary_edges = 0;
  int skipped_records = 0;     ///< OBJ records other than v/f/comments
  int triangulated_faces = 0;  ///< extra triangles introduced by fanning
  int degenerate_faces = 0;
  int reoriented_components = 0;
};

/// Reads `v` and `f` records (1-based indices, `/`-suffixes ignored) and `#`
/// comments; anything else bumps the skipped-record counter.
Mesh load_obj(std::istream& in, const ObjOptions& opts = {}, LoadReport* report = nullptr);
Mesh load_obj_file(const std::string& path, const ObjOptions& opts = {},
                   LoadReport* report = nullptr);

/// Offsets every coordinate by uniform noise in [-magnitude, magnitude],
/// deterministically for a fixed seed. Connectivity is untouched.
Mesh perturb_generic(const Mesh& mesh, double magnitude, std::uint64_t seed);

/// Front iff the camera lies strictly on the normal side of the face plane.
/// Exact; throws DegenerateFacing on an edge-on face.
Facing face_facing(const Mesh& mesh, const Camera& camera, int face);

/// Concave iff the opposite vertex of each adjacent face is in front of the
/// other face. Interior edges only; throws CoplanarFaces when flat.
EdgeConvexity edge_convexity(const Mesh& mesh, int edge);

}  // namespace contourline
