#pragma once

#include <span>
#include <vector>

#include "contourline/mesh.hpp"
#include "contourline/types.hpp"

namespace contourline {

class Camera;

/// Bounding volume hierarchy over mesh triangles (binned SAH, at most 4
/// triangles per leaf). Box tests are conservative float slab tests; the
/// triangles that survive are decided with exact orientation predicates, so
/// a true hit is never culled.
class RayAccel {
 public:
  explicit RayAccel(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }

  /// Number of non-excluded triangles crossed strictly between `p` and the
  /// eye. Exclusions are face ids (typically the faces adjacent to the curve
  /// point being tested). Throws GrazingHit when the segment meets a
  /// triangle edge, vertex or plane exactly.
  int count_occluders(const Vec3& p, const Eye& eye, std::span<const int> exclusions) const;

  /// Occluders along the open segment strictly between p and q.
  int count_segment(const Vec3& p, const Vec3& q, std::span<const int> exclusions) const;

  /// True if any triangle lies in the open half-line from `origin` along
  /// `dir` (both endpoints at finite/infinite positions excluded).
  bool any_along_ray(const Vec3& origin, const Vec3& dir,
                     std::span<const int> exclusions) const;

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;  // internal
    int first = 0, count = 0;   // leaf triangle range
    bool leaf = false;
  };

  const Mesh* mesh_;
  std::vector<Node> nodes_;
  std::vector<int> tri_order_;

  int build(std::vector<int>& tris, int begin, int end,
            const std::vector<Vec3>& centroids);

  template <typename Test>
  int walk(const Vec3& origin, const Vec3& dir, double tmax, Test&& test) const;
};

}  // namespace contourline
