#include "contourline/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contourline/errors.hpp"
#include "contourline/predicates.hpp"

namespace contourline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// multiplicative slack on slab intervals; boxes are also padded at build
constexpr double kSlabSlack = 1.0000004;

struct Box {
  Vec3 lo = Vec3::Constant(kInf);
  Vec3 hi = Vec3::Constant(-kInf);
  void grow(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void grow(const Box& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  double area() const {
    const Vec3 d = (hi - lo).cwiseMax(0.0);
    return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.z() * d.x());
  }
};

Box triangle_box(const Mesh& mesh, int f) {
  Box b;
  for (int v : mesh.faces[f]) b.grow(mesh.vertices[v]);
  const Vec3 pad = 1e-12 * (Vec3::Ones() + b.hi.cwiseAbs().cwiseMax(b.lo.cwiseAbs()));
  b.lo -= pad;
  b.hi += pad;
  return b;
}

bool slab_hit(const Vec3& lo, const Vec3& hi, const Vec3& origin, const Vec3& inv_dir,
              double tmax) {
  double t0 = 0.0, t1 = tmax;
  for (int a = 0; a < 3; a++) {
    double ta = (lo[a] - origin[a]) * inv_dir[a];
    double tb = (hi[a] - origin[a]) * inv_dir[a];
    if (std::isnan(ta) || std::isnan(tb)) continue;  // 0 * inf: ray in-plane of slab
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb * kSlabSlack);
    if (t0 > t1) return false;
  }
  return true;
}

// Exact crossing of the open segment (p, far) against triangle abc, where
// `far` is the eye (possibly at infinity). Returns 1 on a proper crossing,
// 0 on none; throws GrazingHit on any zero orientation.
int segment_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& p, const Eye& eye,
                     int face) {
  const Sign sp = orient3d(a, b, c, p);
  const Sign sq = orient3d_eye(a, b, c, eye);
  if (sp == Sign::Zero || sq == Sign::Zero) throw GrazingHit(face);
  if (sp == sq) return 0;
  // wedge tests around the segment: orient3d(p, eye, x, y) for the three
  // directed triangle edges; eye in slot 1 -> swap with slot 3 flips sign
  auto side = [&](const Vec3& x, const Vec3& y) {
    return flip(orient3d_eye(p, y, x, eye));
  };
  const Sign t1 = side(a, b);
  const Sign t2 = side(b, c);
  if (t1 == Sign::Zero || t2 == Sign::Zero) throw GrazingHit(face);
  if (t1 != t2) return 0;
  const Sign t3 = side(c, a);
  if (t3 == Sign::Zero) throw GrazingHit(face);
  return t3 == t1 ? 1 : 0;
}

}  // namespace

RayAccel::RayAccel(const Mesh& mesh) : mesh_(&mesh) {
  const int nf = static_cast<int>(mesh.faces.size());
  std::vector<int> tris(nf);
  std::vector<Vec3> centroids(nf);
  for (int f = 0; f < nf; f++) {
    tris[f] = f;
    centroids[f] = mesh.face_centroid(f);
  }
  if (nf > 0) build(tris, 0, nf, centroids);
}

int RayAccel::build(std::vector<int>& tris, int begin, int end,
                    const std::vector<Vec3>& centroids) {
  Box bounds, centroid_bounds;
  for (int i = begin; i < end; i++) {
    bounds.grow(triangle_box(*mesh_, tris[i]));
    centroid_bounds.grow(centroids[tris[i]]);
  }

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  nodes_[id].lo = bounds.lo;
  nodes_[id].hi = bounds.hi;

  const int count = end - begin;
  const Vec3 extent = centroid_bounds.hi - centroid_bounds.lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;

  if (count <= 4 || extent[axis] <= 0.0) {
    nodes_[id].leaf = true;
    nodes_[id].first = static_cast<int>(tri_order_.size());
    nodes_[id].count = count;
    for (int i = begin; i < end; i++) tri_order_.push_back(tris[i]);
    return id;
  }

  // binned SAH along the widest centroid axis
  constexpr int kBins = 16;
  Box bin_box[kBins];
  int bin_count[kBins] = {0};
  auto bin_of = [&](int tri) {
    const double rel = (centroids[tri][axis] - centroid_bounds.lo[axis]) / extent[axis];
    return std::min(kBins - 1, static_cast<int>(rel * kBins));
  };
  for (int i = begin; i < end; i++) {
    const int b = bin_of(tris[i]);
    bin_count[b]++;
    bin_box[b].grow(triangle_box(*mesh_, tris[i]));
  }
  double right_area[kBins] = {0};
  int right_count[kBins] = {0};
  {
    Box acc;
    int n = 0;
    for (int b = kBins - 1; b >= 1; b--) {
      acc.grow(bin_box[b]);
      n += bin_count[b];
      right_area[b] = n > 0 ? acc.area() : 0.0;
      right_count[b] = n;
    }
  }
  double best_cost = kInf;
  int best_split = -1;
  {
    Box acc;
    int n = 0;
    for (int b = 0; b < kBins - 1; b++) {
      acc.grow(bin_box[b]);
      n += bin_count[b];
      if (n == 0 || right_count[b + 1] == 0) continue;
      const double cost = n * acc.area() + right_count[b + 1] * right_area[b + 1];
      if (cost < best_cost) {
        best_cost = cost;
        best_split = b;
      }
    }
  }

  int mid;
  if (best_split < 0) {
    mid = begin + count / 2;
    std::nth_element(tris.begin() + begin, tris.begin() + mid, tris.begin() + end,
                     [&](int a2, int b2) { return centroids[a2][axis] < centroids[b2][axis]; });
  } else {
    auto it = std::partition(tris.begin() + begin, tris.begin() + end,
                             [&](int t) { return bin_of(t) <= best_split; });
    mid = static_cast<int>(it - tris.begin());
    if (mid == begin || mid == end) mid = begin + count / 2;
  }

  const int left = build(tris, begin, mid, centroids);
  const int right = build(tris, mid, end, centroids);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Test>
int RayAccel::walk(const Vec3& origin, const Vec3& dir, double tmax, Test&& test) const {
  if (nodes_.empty()) return 0;
  const Vec3 inv_dir = dir.cwiseInverse();
  int total = 0;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!slab_hit(node.lo, node.hi, origin, inv_dir, tmax)) continue;
    if (node.leaf) {
      for (int i = 0; i < node.count; i++) total += test(tri_order_[node.first + i]);
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return total;
}

int RayAccel::count_occluders(const Vec3& p, const Eye& eye,
                              std::span<const int> exclusions) const {
  const Vec3 dir = eye.infinite ? eye.v : Vec3(eye.v - p);
  const double tmax = eye.infinite ? kInf : 1.0;
  return walk(p, dir, tmax, [&](int face) -> int {
    for (int ex : exclusions)
      if (ex == face) return 0;
    const auto& tri = mesh_->faces[face];
    return segment_triangle(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                            mesh_->vertices[tri[2]], p, eye, face);
  });
}

int RayAccel::count_segment(const Vec3& p, const Vec3& q,
                            std::span<const int> exclusions) const {
  return count_occluders(p, Eye::point(q), exclusions);
}

bool RayAccel::any_along_ray(const Vec3& origin, const Vec3& dir,
                             std::span<const int> exclusions) const {
  const Eye far = Eye::at_infinity(dir);
  bool found = false;
  walk(origin, dir, kInf, [&](int face) -> int {
    if (found) return 0;
    for (int ex : exclusions)
      if (ex == face) return 0;
    const auto& tri = mesh_->faces[face];
    if (segment_triangle(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                         mesh_->vertices[tri[2]], origin, far, face) > 0)
      found = true;
    return 0;
  });
  return found;
}

}  // namespace contourline
