#pragma once

// Procedural meshes and scenes shared by the test and acceptance suites.

#include <cstdint>
#include <string>
#include <vector>

#include "contourline/camera.hpp"
#include "contourline/mesh.hpp"

namespace contourline::fixtures {

Mesh cube();                      // 12 triangles, closed
Mesh flat_square();               // 2 triangles
Mesh flat_grid(int n);            // n x n cells in the z = 0 plane
Mesh square_pyramid();            // 4 side faces, open base
Mesh icosphere(int level, double radius = 1.0, const Vec3& center = Vec3::Zero());
Mesh torus(double major = 2.0, double minor = 0.7, int major_segments = 48,
           int minor_segments = 24, const Vec3& center = Vec3::Zero());
Mesh open_cylinder(double radius = 1.0, double height = 2.0, int segments = 32, int rings = 4);
Mesh saddle_grid(int n = 8, double extent = 1.0);  // z = x^2 - y^2
Mesh genus2_block();                               // brick with two tunnels
Mesh two_tori();                                   // one behind the other (z = -6)
Mesh nested_spheres(int level = 3);                // radius 1 inside radius 2
Mesh noisy_icosphere(int level, double sigma, std::uint64_t seed);
Mesh bumpy_torus();  // wavy minor radius; produces curtain folds
Mesh boundary_fold_strip();  // one boundary edge hidden behind a one-ring face

/// Merges meshes into one multi-component manifold.
Mesh merge(const std::vector<Mesh>& parts);

std::string to_obj(const Mesh& mesh);

/// Deterministic camera on a sphere around the scene, looking at its center.
Camera random_camera(const Mesh& mesh, std::uint64_t seed,
                     Camera::Kind kind = Camera::Kind::Perspective);

}  // namespace contourline::fixtures
