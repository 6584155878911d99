#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "contourline/mesh.hpp"
#include "contourline/types.hpp"

namespace contourline {

class Camera;

/// Contour and boundary edges for one camera. An interior edge is a contour
/// iff its two faces have opposite facing; boundary edges are always carried.
struct ContourSet {
  std::vector<int> contour_edges;              ///< sorted edge ids
  std::vector<EdgeConvexity> contour_convexity;  ///< parallel to contour_edges
  std::vector<int> boundary_edges;             ///< sorted edge ids

  struct Stats {
    int edges_tested = 0;
    int octree_nodes_visited = 0;
    double millis = 0;
  } stats;

  bool operator==(const ContourSet& o) const {
    return contour_edges == o.contour_edges && boundary_edges == o.boundary_edges;
  }
};

struct ExtractOptions {
  bool include_concave = true;  ///< drop concave contour edges for visible-only paths
  int threads = 1;
};

ContourSet extract_brute_force(const Mesh& mesh, const Camera& camera,
                               const ExtractOptions& opts = {});

/// Camera-independent index over per-face dual points s = (-n, p.n)
/// normalized onto the unit hypercube, with one octree per hypercube facet.
/// Octree nodes prune conservatively; candidate edges are confirmed with the
/// same exact facing test as the brute force path, so query results are
/// identical to it.
class DualIndex {
 public:
  static DualIndex build(const Mesh& mesh);

  ContourSet query(const Camera& camera, const ExtractOptions& opts = {}) const;

  void save(std::ostream& out) const;
  void save_file(const std::string& path) const;
  /// Validates the magic, version and mesh hash.
  static DualIndex load(std::istream& in, const Mesh& mesh);
  static DualIndex load_file(const std::string& path, const Mesh& mesh);

  int segment_count() const { return static_cast<int>(seg_edges_.size()); }
  const Vec4& face_dual(int face) const { return face_dual_[face]; }

 private:
  struct Node {
    Vec4 lo, hi;  // bounds over both dual endpoints of all segments below
    int children[8] = {-1, -1, -1, -1, -1, -1, -1, -1};
    int first_seg = 0;  // into seg_order_, leaves only
    int seg_count = 0;
    bool leaf = true;
  };

  const Mesh* mesh_ = nullptr;
  std::uint64_t mesh_hash_ = 0;
  std::vector<Vec4> face_dual_;
  std::vector<int> seg_edges_;  ///< interior edge id per dual segment
  std::vector<int> seg_order_;  ///< leaf-packed permutation of segment ids
  std::vector<Node> nodes_;
  int roots_[8] = {-1, -1, -1, -1, -1, -1, -1, -1};

  int build_node(std::vector<int>& segs, int begin, int end, int facet, int depth);
};

ContourSet query_dual(const DualIndex& index, const Camera& camera,
                      const ExtractOptions& opts = {});

struct RandomizedOptions {
  int num_seeds = 32;
  std::uint64_t seed = 0;
  const ContourSet* warm_start = nullptr;  ///< previous frame's result as extra seeds
  bool include_concave = true;
};

/// Weighted random seeds (weight = exterior dihedral / pi, drawn without
/// replacement) plus advancing-front tracing around vertices. Every reported
/// component is complete; the result is a subset of the brute-force set.
ContourSet extract_randomized(const Mesh& mesh, const Camera& camera,
                              const RandomizedOptions& opts);

}  // namespace contourline
