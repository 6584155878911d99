#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "contourline/camera.hpp"
#include "contourline/errors.hpp"
#include "contourline/extraction.hpp"
#include "contourline/predicates.hpp"

namespace contourline {

namespace {

static_assert(std::endian::native == std::endian::little,
              "index sidecar format is little-endian");

constexpr char kMagic[4] = {'C', 'D', 'X', '1'};
constexpr std::uint32_t kVersion = 1;

Vec4 dual_point(const Mesh& mesh, int face) {
  const auto& tri = mesh.faces[face];
  const Vec3& p = mesh.vertices[tri[0]];
  const Vec3 n =
      (mesh.vertices[tri[1]] - p).cross(mesh.vertices[tri[2]] - p);  // unnormalized
  Vec4 s(-n.x(), -n.y(), -n.z(), p.dot(n));
  const double m = s.cwiseAbs().maxCoeff();
  if (m == 0.0)
    throw DegenerateFacing(face);  // zero-area face; perturb the mesh first
  return s / m;
}

// Hypercube facet of a dual point: dominant axis and its sign, 0..7.
int facet_of(const Vec4& s) {
  int axis = 0;
  double best = std::fabs(s[0]);
  for (int i = 1; i < 4; i++) {
    const double v = std::fabs(s[i]);
    if (v > best) {
      best = v;
      axis = i;
    }
  }
  // the w facet pair shares one octree slot per sign with axis folding below
  return axis * 2 + (s[axis] >= 0 ? 0 : 1);
}

struct PlaneCoeffs {
  Vec4 q;
};

PlaneCoeffs plane_for(const Camera& camera) {
  if (camera.kind() == Camera::Kind::Perspective) {
    const Vec3& c = camera.center();
    return {Vec4(c.x(), c.y(), c.z(), 1.0)};
  }
  const Vec3& v = camera.direction();
  return {Vec4(-v.x(), -v.y(), -v.z(), 0.0)};
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("truncated index sidecar");
}

}  // namespace

int DualIndex::build_node(std::vector<int>& segs, int begin, int end, int facet, int depth) {
  Node node;
  node.lo = Vec4::Constant(std::numeric_limits<double>::infinity());
  node.hi = Vec4::Constant(-std::numeric_limits<double>::infinity());
  for (int i = begin; i < end; i++) {
    const auto& e = mesh_->edges[seg_edges_[segs[i]]];
    for (int f : {e.f0, e.f1}) {
      node.lo = node.lo.cwiseMin(face_dual_[f]);
      node.hi = node.hi.cwiseMax(face_dual_[f]);
    }
  }
  // round the box outward so float rounding can never shrink it
  for (int i = 0; i < 4; i++) {
    const double pad = 1e-12 + 1e-12 * std::max(std::fabs(node.lo[i]), std::fabs(node.hi[i]));
    node.lo[i] -= pad;
    node.hi[i] += pad;
  }

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);

  if (end - begin <= 16 || depth >= 10) {
    nodes_[id].leaf = true;
    nodes_[id].first_seg = static_cast<int>(seg_order_.size());
    nodes_[id].seg_count = end - begin;
    for (int i = begin; i < end; i++) seg_order_.push_back(segs[i]);
    std::fill(std::begin(nodes_[id].children), std::end(nodes_[id].children), -1);
    return id;
  }

  // split on the 3 free coordinates of the facet, keyed by the first dual
  // endpoint (the second may live anywhere; the node boxes stay correct)
  const int fixed_axis = facet / 2;
  int axes[3], na = 0;
  for (int a = 0; a < 4; a++)
    if (a != fixed_axis) axes[na++] = a;

  Vec4 mid = Vec4::Zero();
  for (int i = begin; i < end; i++) {
    const auto& e = mesh_->edges[seg_edges_[segs[i]]];
    mid += face_dual_[e.f0];
  }
  mid /= static_cast<double>(end - begin);

  auto octant = [&](int seg) {
    const auto& e = mesh_->edges[seg_edges_[seg]];
    const Vec4& s = face_dual_[e.f0];
    int o = 0;
    for (int k = 0; k < 3; k++)
      if (s[axes[k]] >= mid[axes[k]]) o |= 1 << k;
    return o;
  };

  std::stable_sort(segs.begin() + begin, segs.begin() + end,
                   [&](int a, int b) { return octant(a) < octant(b); });

  int starts[9];
  {
    int cursor = begin;
    for (int o = 0; o < 8; o++) {
      starts[o] = cursor;
      while (cursor < end && octant(segs[cursor]) == o) cursor++;
    }
    starts[8] = end;
  }
  // a split that does not separate anything becomes a leaf
  bool useful = false;
  for (int o = 0; o < 8; o++)
    if (starts[o + 1] - starts[o] > 0 && starts[o + 1] - starts[o] < end - begin) useful = true;
  if (!useful) {
    nodes_[id].leaf = true;
    nodes_[id].first_seg = static_cast<int>(seg_order_.size());
    nodes_[id].seg_count = end - begin;
    for (int i = begin; i < end; i++) seg_order_.push_back(segs[i]);
    std::fill(std::begin(nodes_[id].children), std::end(nodes_[id].children), -1);
    return id;
  }

  nodes_[id].leaf = false;
  int children[8];
  for (int o = 0; o < 8; o++) {
    children[o] = starts[o + 1] > starts[o]
                      ? build_node(segs, starts[o], starts[o + 1], facet, depth + 1)
                      : -1;
  }
  std::copy(std::begin(children), std::end(children), std::begin(nodes_[id].children));
  return id;
}

DualIndex DualIndex::build(const Mesh& mesh) {
  DualIndex index;
  index.mesh_ = &mesh;
  index.mesh_hash_ = mesh.content_hash();
  index.face_dual_.resize(mesh.faces.size());
  for (int f = 0; f < static_cast<int>(mesh.faces.size()); f++)
    index.face_dual_[f] = dual_point(mesh, f);

  index.seg_edges_.reserve(mesh.interior_edge_count());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++)
    if (!mesh.is_boundary_edge(e)) index.seg_edges_.push_back(e);

  std::vector<int> by_facet[8];
  for (int s = 0; s < static_cast<int>(index.seg_edges_.size()); s++) {
    const auto& e = mesh.edges[index.seg_edges_[s]];
    by_facet[facet_of(index.face_dual_[e.f0])].push_back(s);
  }
  for (int f = 0; f < 8; f++) {
    if (by_facet[f].empty()) continue;
    index.roots_[f] =
        index.build_node(by_facet[f], 0, static_cast<int>(by_facet[f].size()), f, 0);
  }
  return index;
}

ContourSet DualIndex::query(const Camera& camera, const ExtractOptions& opts) const {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec4 q = plane_for(camera).q;

  // rounding slack: |g| error is far below 64 eps |q|_1 for box coords in
  // [-1,1]; anything closer to zero than this must be confirmed exactly
  const double pad = 64.0 * std::numeric_limits<double>::epsilon() * q.cwiseAbs().sum();

  ContourSet set;
  int visited = 0;
  std::vector<int> stack;
  for (int root : roots_) {
    if (root < 0) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      const Node& node = nodes_[id];
      double lo = 0, hi = 0;
      for (int i = 0; i < 4; i++) {
        const double a = q[i] * node.lo[i];
        const double b = q[i] * node.hi[i];
        lo += std::min(a, b);
        hi += std::max(a, b);
      }
      if (lo - pad > 0.0 || hi + pad < 0.0) continue;
      visited++;
      if (node.leaf) {
        for (int i = 0; i < node.seg_count; i++) {
          const int edge = seg_edges_[seg_order_[node.first_seg + i]];
          const auto& e = mesh_->edges[edge];
          if (face_facing(*mesh_, camera, e.f0) != face_facing(*mesh_, camera, e.f1))
            set.contour_edges.push_back(edge);
        }
      } else {
        for (int child : node.children)
          if (child >= 0) stack.push_back(child);
      }
    }
  }

  std::sort(set.contour_edges.begin(), set.contour_edges.end());
  if (!opts.include_concave) {
    std::vector<int> kept;
    for (int e : set.contour_edges)
      if (edge_convexity(*mesh_, e) == EdgeConvexity::Convex) kept.push_back(e);
    set.contour_edges = std::move(kept);
  }
  set.contour_convexity.resize(set.contour_edges.size());
  for (std::size_t i = 0; i < set.contour_edges.size(); i++)
    set.contour_convexity[i] = edge_convexity(*mesh_, set.contour_edges[i]);
  for (int e = 0; e < static_cast<int>(mesh_->edges.size()); e++)
    if (mesh_->is_boundary_edge(e)) set.boundary_edges.push_back(e);

  set.stats.octree_nodes_visited = visited;
  set.stats.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return set;
}

void DualIndex::save(std::ostream& out) const {
  out.write(kMagic, 4);
  write_raw(out, kVersion);
  write_raw(out, mesh_hash_);
  write_raw(out, static_cast<std::uint32_t>(face_dual_.size()));
  write_raw(out, static_cast<std::uint32_t>(seg_edges_.size()));
  write_raw(out, static_cast<std::uint32_t>(seg_order_.size()));
  write_raw(out, static_cast<std::uint32_t>(nodes_.size()));
  for (int r : roots_) write_raw(out, static_cast<std::int32_t>(r));
  for (const auto& s : face_dual_)
    out.write(reinterpret_cast<const char*>(s.data()), 4 * sizeof(double));
  for (int e : seg_edges_) write_raw(out, static_cast<std::int32_t>(e));
  for (int s : seg_order_) write_raw(out, static_cast<std::int32_t>(s));
  for (const auto& n : nodes_) {
    out.write(reinterpret_cast<const char*>(n.lo.data()), 4 * sizeof(double));
    out.write(reinterpret_cast<const char*>(n.hi.data()), 4 * sizeof(double));
    for (int c : n.children) write_raw(out, static_cast<std::int32_t>(c));
    write_raw(out, static_cast<std::int32_t>(n.first_seg));
    write_raw(out, static_cast<std::int32_t>(n.seg_count));
    write_raw(out, static_cast<std::uint8_t>(n.leaf ? 1 : 0));
  }
  if (!out) throw Error("failed writing index sidecar");
}

DualIndex DualIndex::load(std::istream& in, const Mesh& mesh) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error("not an index sidecar (bad magic)");
  std::uint32_t version;
  read_raw(in, version);
  if (version != kVersion) throw Error("unsupported index sidecar version");
  DualIndex index;
  index.mesh_ = &mesh;
  read_raw(in, index.mesh_hash_);
  if (index.mesh_hash_ != mesh.content_hash())
    throw Error("index sidecar was built from a different mesh");
  std::uint32_t nfaces, nsegs, norder, nnodes;
  read_raw(in, nfaces);
  read_raw(in, nsegs);
  read_raw(in, norder);
  read_raw(in, nnodes);
  for (int& r : index.roots_) {
    std::int32_t v;
    read_raw(in, v);
    r = v;
  }
  index.face_dual_.resize(nfaces);
  for (auto& s : index.face_dual_) {
    in.read(reinterpret_cast<char*>(s.data()), 4 * sizeof(double));
    if (!in) throw Error("truncated index sidecar");
  }
  index.seg_edges_.resize(nsegs);
  for (int& e : index.seg_edges_) {
    std::int32_t v;
    read_raw(in, v);
    e = v;
  }
  index.seg_order_.resize(norder);
  for (int& s : index.seg_order_) {
    std::int32_t v;
    read_raw(in, v);
    s = v;
  }
  index.nodes_.resize(nnodes);
  for (auto& n : index.nodes_) {
    in.read(reinterpret_cast<char*>(n.lo.data()), 4 * sizeof(double));
    in.read(reinterpret_cast<char*>(n.hi.data()), 4 * sizeof(double));
    for (int& c : n.children) {
      std::int32_t v;
      read_raw(in, v);
      c = v;
    }
    std::int32_t first, count;
    read_raw(in, first);
    read_raw(in, count);
    std::uint8_t leaf;
    read_raw(in, leaf);
    n.first_seg = first;
    n.seg_count = count;
    n.leaf = leaf != 0;
  }
  return index;
}

void DualIndex::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save(out);
}

DualIndex DualIndex::load_file(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return load(in, mesh);
}

}  // namespace contourline
