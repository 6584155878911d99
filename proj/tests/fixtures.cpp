#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace contourline::fixtures {

namespace {

using Faces = std::vector<std::array<int, 3>>;

Mesh build(std::vector<Vec3> v, Faces f) { return Mesh::from_data(std::move(v), std::move(f)); }

}  // namespace

Mesh cube() {
  std::vector<Vec3> v = {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
                         {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1}};
  // outward-facing, counter-clockwise from outside
  Faces f = {{0, 2, 1}, {0, 3, 2},   // z = -1
             {4, 5, 6}, {4, 6, 7},   // z = +1
             {0, 1, 5}, {0, 5, 4},   // y = -1
             {2, 3, 7}, {2, 7, 6},   // y = +1
             {1, 2, 6}, {1, 6, 5},   // x = +1
             {3, 0, 4}, {3, 4, 7}};  // x = -1
  return build(std::move(v), std::move(f));
}

Mesh flat_square() {
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  Faces f = {{0, 1, 2}, {0, 2, 3}};
  return build(std::move(v), std::move(f));
}

Mesh flat_grid(int n) {
  std::vector<Vec3> v;
  Faces f;
  for (int j = 0; j <= n; j++)
    for (int i = 0; i <= n; i++) v.emplace_back(i, j, 0.0);
  auto at = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; j++)
    for (int i = 0; i < n; i++) {
      f.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      f.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  return build(std::move(v), std::move(f));
}

Mesh square_pyramid() {
  std::vector<Vec3> v = {{0, 0, 1}, {1, 1, 0}, {-1, 1, 0}, {-1, -1, 0}, {1, -1, 0}};
  Faces f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}};
  return build(std::move(v), std::move(f));
}

Mesh icosphere(int level, double radius, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  Faces f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();

  for (int l = 0; l < level; l++) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((0.5 * (v[a] + v[b])).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    Faces next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p = center + radius * p;
  return build(std::move(v), std::move(f));
}

namespace {

Mesh grid_surface(int nu, int nv, bool wrap_u, bool wrap_v,
                  const std::function<Vec3(double, double)>& eval) {
  std::vector<Vec3> v;
  const int cols = wrap_u ? nu : nu + 1;
  const int rows = wrap_v ? nv : nv + 1;
  for (int j = 0; j < rows; j++)
    for (int i = 0; i < cols; i++)
      v.push_back(eval(static_cast<double>(i) / nu, static_cast<double>(j) / nv));
  auto at = [&](int i, int j) { return (j % rows) * cols + (i % cols); };
  Faces f;
  for (int j = 0; j < (wrap_v ? nv : nv); j++) {
    if (!wrap_v && j >= nv) break;
    for (int i = 0; i < nu; i++) {
      const int a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      f.push_back({a, b, c});
      f.push_back({a, c, d});
    }
  }
  return build(std::move(v), std::move(f));
}

}  // namespace

Mesh torus(double major, double minor, int major_segments, int minor_segments,
           const Vec3& center) {
  return grid_surface(major_segments, minor_segments, true, true, [&](double u, double w) {
    const double a = 2 * M_PI * u, b = 2 * M_PI * w;
    const double r = major + minor * std::cos(b);
    return center + Vec3(r * std::cos(a), r * std::sin(a), minor * std::sin(b));
  });
}

Mesh open_cylinder(double radius, double height, int segments, int rings) {
  return grid_surface(segments, rings, true, false, [&](double u, double w) {
    const double a = 2 * M_PI * u;
    return Vec3(radius * std::cos(a), radius * std::sin(a), height * (w - 0.5));
  });
}

Mesh saddle_grid(int n, double extent) {
  Mesh flat = flat_grid(n);
  std::vector<Vec3> v = flat.vertices;
  for (auto& p : v) {
    const double x = 2.0 * extent * (p.x() / n - 0.5);
    const double y = 2.0 * extent * (p.y() / n - 0.5);
    p = Vec3(x, y, x * x - y * y);
  }
  return Mesh::from_data(std::move(v), flat.faces);
}

Mesh genus2_block() {
  // voxel solid: 7 x 4 x 2 brick with two 1 x 2 x 2 tunnels through z
  const int nx = 7, ny = 4, nz = 2;
  auto solid = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return false;
    const bool hole1 = (x == 1 || x == 2) && (y == 1 || y == 2);
    const bool hole2 = (x == 4 || x == 5) && (y == 1 || y == 2);
    return !(hole1 || hole2);
  };
  std::map<std::array<int, 3>, int> vid;
  std::vector<Vec3> verts;
  auto vertex = [&](int x, int y, int z) {
    const std::array<int, 3> key{x, y, z};
    auto it = vid.find(key);
    if (it != vid.end()) return it->second;
    verts.emplace_back(x, y, z);
    vid.emplace(key, static_cast<int>(verts.size()) - 1);
    return static_cast<int>(verts.size()) - 1;
  };
  Faces faces;
  // emit a quad between solid and empty cells, oriented toward the empty side
  auto emit = [&](int a, int b, int c, int d) {
    faces.push_back({a, b, c});
    faces.push_back({a, c, d});
  };
  for (int x = 0; x < nx; x++)
    for (int y = 0; y < ny; y++)
      for (int z = 0; z < nz; z++) {
        if (!solid(x, y, z)) continue;
        if (!solid(x - 1, y, z))
          emit(vertex(x, y, z), vertex(x, y, z + 1), vertex(x, y + 1, z + 1),
               vertex(x, y + 1, z));
        if (!solid(x + 1, y, z))
          emit(vertex(x + 1, y, z), vertex(x + 1, y + 1, z), vertex(x + 1, y + 1, z + 1),
               vertex(x + 1, y, z + 1));
        if (!solid(x, y - 1, z))
          emit(vertex(x, y, z), vertex(x + 1, y, z), vertex(x + 1, y, z + 1),
               vertex(x, y, z + 1));
        if (!solid(x, y + 1, z))
          emit(vertex(x, y + 1, z), vertex(x, y + 1, z + 1), vertex(x + 1, y + 1, z + 1),
               vertex(x + 1, y + 1, z));
        if (!solid(x, y, z - 1))
          emit(vertex(x, y, z), vertex(x, y + 1, z), vertex(x + 1, y + 1, z),
               vertex(x + 1, y, z));
        if (!solid(x, y, z + 1))
          emit(vertex(x, y, z + 1), vertex(x + 1, y, z + 1), vertex(x + 1, y + 1, z + 1),
               vertex(x, y + 1, z + 1));
      }
  return build(std::move(verts), std::move(faces));
}

Mesh merge(const std::vector<Mesh>& parts) {
  std::vector<Vec3> v;
  Faces f;
  int offset = 0;
  for (const auto& part : parts) {
    v.insert(v.end(), part.vertices.begin(), part.vertices.end());
    for (const auto& tri : part.faces)
      f.push_back({tri[0] + offset, tri[1] + offset, tri[2] + offset});
    offset += static_cast<int>(part.vertices.size());
  }
  return build(std::move(v), std::move(f));
}

Mesh two_tori() {
  return merge({torus(2.0, 0.7, 32, 16), torus(2.4, 0.8, 32, 16, Vec3(0.4, 0.2, -6.0))});
}

Mesh nested_spheres(int level) {
  return merge({icosphere(level, 1.0), icosphere(level, 2.0)});
}

Mesh noisy_icosphere(int level, double sigma, std::uint64_t seed) {
  Mesh base = icosphere(level);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<Vec3> v = base.vertices;
  for (auto& p : v) p *= 1.0 + noise(rng);
  return Mesh::from_data(std::move(v), base.faces);
}

Mesh bumpy_torus() {
  return grid_surface(64, 20, true, true, [&](double u, double w) {
    const double a = 2 * M_PI * u, b = 2 * M_PI * w;
    const double minor = 0.55 + 0.22 * std::cos(3.0 * a);
    const double r = 2.0 + minor * std::cos(b);
    return Vec3(r * std::cos(a), r * std::sin(a), minor * std::sin(b));
  });
}

Mesh boundary_fold_strip() {
  // fan of four triangles around p; the strip folds so the triangle (p,q,r)
  // hides the boundary edge p-e2 from cameras on the +z side
  std::vector<Vec3> v = {
      {0, 0, 0},          // 0: p
      {-1.0, -0.1, 0.1},  // 1: e1, boundary neighbor
      {-0.5, 0.9, 0.05},  // 2: q
      {0.6, 0.8, 0.3},    // 3: r
      {0.8, -0.3, -1.2},  // 4: e2, folded under the fan
  };
  Faces f = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
  return build(std::move(v), std::move(f));
}

std::string to_obj(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& p : mesh.vertices) out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
  for (const auto& tri : mesh.faces)
    out << "f " << tri[0] + 1 << " " << tri[1] + 1 << " " << tri[2] + 1 << "\n";
  return out.str();
}

Camera random_camera(const Mesh& mesh, std::uint64_t seed, Camera::Kind kind) {
  Vec3 lo = mesh.vertices[0], hi = mesh.vertices[0];
  for (const auto& p : mesh.vertices) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double diag = (hi - lo).norm();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double z = 2.0 * uni(rng) - 1.0;
  const double theta = 2.0 * M_PI * uni(rng);
  const double rxy = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Vec3 dir(rxy * std::cos(theta), rxy * std::sin(theta), z);
  const double dist = diag * (1.4 + uni(rng));

  if (kind == Camera::Kind::Perspective)
    return Camera::perspective(center + dist * dir, center, Vec3(0, 1, 0), 1.0);
  return Camera::orthographic(-dir, center + dist * dir, Vec3(0, 1, 0));
}

}  // namespace contourline::fixtures
