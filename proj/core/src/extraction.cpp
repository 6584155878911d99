#include "contourline/extraction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "contourline/camera.hpp"
#include "contourline/errors.hpp"
#include "contourline/parallel.hpp"
#include "contourline/predicates.hpp"

namespace contourline {

namespace {

std::vector<Facing> all_facings(const Mesh& mesh, const Camera& camera, int threads) {
  std::vector<Facing> facing(mesh.faces.size());
  parallel_for(static_cast<int>(mesh.faces.size()),
               [&](int f) { facing[f] = face_facing(mesh, camera, f); }, threads);
  return facing;
}

void finalize(const Mesh& mesh, ContourSet& set, bool include_concave) {
  std::sort(set.contour_edges.begin(), set.contour_edges.end());
  if (!include_concave) {
    std::vector<int> kept;
    kept.reserve(set.contour_edges.size());
    for (int e : set.contour_edges)
      if (edge_convexity(mesh, e) == EdgeConvexity::Convex) kept.push_back(e);
    set.contour_edges = std::move(kept);
  }
  set.contour_convexity.resize(set.contour_edges.size());
  for (std::size_t i = 0; i < set.contour_edges.size(); i++)
    set.contour_convexity[i] = edge_convexity(mesh, set.contour_edges[i]);
  set.boundary_edges.clear();
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++)
    if (mesh.is_boundary_edge(e)) set.boundary_edges.push_back(e);
}

}  // namespace

ContourSet extract_brute_force(const Mesh& mesh, const Camera& camera,
                               const ExtractOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  ContourSet set;
  const auto facing = all_facings(mesh, camera, opts.threads);
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++) {
    const auto& edge = mesh.edges[e];
    if (edge.f1 < 0) continue;
    if (facing[edge.f0] != facing[edge.f1]) set.contour_edges.push_back(e);
  }
  set.stats.edges_tested = static_cast<int>(mesh.edges.size());
  finalize(mesh, set, opts.include_concave);
  set.stats.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return set;
}

ContourSet extract_randomized(const Mesh& mesh, const Camera& camera,
                              const RandomizedOptions& opts) {
  if (opts.num_seeds < 1) throw Error("num_seeds must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<int> interior;
  interior.reserve(mesh.edges.size());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); e++)
    if (!mesh.is_boundary_edge(e)) interior.push_back(e);

  // Exterior dihedral weights: the angle between the face normals, which for
  // a random view is proportional to the chance the edge is a contour.
  std::vector<double> weight(interior.size());
  double total = 0;
  for (std::size_t i = 0; i < interior.size(); i++) {
    const auto& e = mesh.edges[interior[i]];
    const Vec3& n0 = mesh.face_normals[e.f0];
    const Vec3& n1 = mesh.face_normals[e.f1];
    const double angle = std::atan2(n0.cross(n1).norm(), n0.dot(n1));
    weight[i] = angle / M_PI;
    total += weight[i];
  }

  std::vector<int> seeds;
  if (opts.num_seeds >= static_cast<int>(interior.size()) || total <= 0) {
    seeds = interior;
  } else {
    // alias table for O(1) weighted draws
    const int n = static_cast<int>(interior.size());
    std::vector<double> prob(n);
    std::vector<int> alias(n, 0);
    {
      std::vector<int> small, large;
      std::vector<double> scaled(n);
      for (int i = 0; i < n; i++) {
        scaled[i] = weight[i] * n / total;
        (scaled[i] < 1.0 ? small : large).push_back(i);
      }
      while (!small.empty() && !large.empty()) {
        const int s = small.back();
        small.pop_back();
        const int l = large.back();
        prob[s] = scaled[s];
        alias[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
          large.pop_back();
          small.push_back(l);
        }
      }
      for (int l : large) prob[l] = 1.0;
      for (int s : small) prob[s] = 1.0;
    }
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<char> taken(n, 0);
    int drawn = 0;
    long attempts = 0;
    const long max_attempts = 50l * opts.num_seeds + 1000;
    while (drawn < opts.num_seeds && attempts < max_attempts) {
      attempts++;
      const int slot = std::min(n - 1, static_cast<int>(uni(rng) * n));
      const int pick = uni(rng) < prob[slot] ? slot : alias[slot];
      if (!taken[pick]) {
        taken[pick] = 1;
        seeds.push_back(interior[pick]);
        drawn++;
      }
    }
    // rejection stalls only when most edges are already drawn
    for (int i = 0; drawn < opts.num_seeds && i < n; i++) {
      if (!taken[i]) {
        taken[i] = 1;
        seeds.push_back(interior[i]);
        drawn++;
      }
    }
  }
  if (opts.warm_start) {
    for (int e : opts.warm_start->contour_edges)
      if (!mesh.is_boundary_edge(e)) seeds.push_back(e);
  }

  // advancing-front trace around vertices from every seed that hits
  std::vector<signed char> state(mesh.edges.size(), 0);  // 0 untested, 1 contour, -1 not
  auto is_contour = [&](int e) {
    if (state[e] != 0) return state[e] > 0;
    const auto& edge = mesh.edges[e];
    const bool c = face_facing(mesh, camera, edge.f0) != face_facing(mesh, camera, edge.f1);
    state[e] = c ? 1 : -1;
    return c;
  };

  ContourSet set;
  std::vector<int> stack;
  std::vector<char> collected(mesh.edges.size(), 0);
  for (int seed_edge : seeds) {
    if (collected[seed_edge] || !is_contour(seed_edge)) continue;
    stack.push_back(seed_edge);
    collected[seed_edge] = 1;
    while (!stack.empty()) {
      const int e = stack.back();
      stack.pop_back();
      set.contour_edges.push_back(e);
      for (int v : {mesh.edges[e].v0, mesh.edges[e].v1}) {
        for (int next : mesh.edges_of_vertex(v)) {
          if (collected[next] || mesh.is_boundary_edge(next)) continue;
          if (is_contour(next)) {
            collected[next] = 1;
            stack.push_back(next);
          }
        }
      }
    }
  }

  set.stats.edges_tested =
      static_cast<int>(std::count_if(state.begin(), state.end(), [](signed char s) { return s != 0; }));
  finalize(mesh, set, opts.include_concave);
  set.stats.millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return set;
}

ContourSet query_dual(const DualIndex& index, const Camera& camera, const ExtractOptions& opts) {
  return index.query(camera, opts);
}

}  // namespace contourline
