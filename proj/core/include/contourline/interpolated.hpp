#pragma once

#include <vector>

#include "contourline/mesh.hpp"
#include "contourline/types.hpp"

namespace contourline {

class Camera;
class RayAccel;

/// Per-vertex smooth-surface proxies: averaged normals, the orientation
/// function g, and radial curvature.
struct VertexField {
  std::vector<Vec3> normals;         ///< unit, area-weighted
  std::vector<double> g;             ///< (p - c) . n, camera-dependent
  std::vector<double> radial_curvature;
  std::vector<std::uint8_t> radial_reliable;  ///< 0 when the view is normal to the surface
};

/// Area-weighted vertex normals. Falls back to tip-angle weights at vertices
/// where the weighted sum vanishes.
VertexField vertex_normals(const Mesh& mesh);

/// Fills field.g for this camera.
void compute_orientation(const Mesh& mesh, const Camera& camera, VertexField& field);

/// Normal curvature along the view direction projected into the tangent
/// plane. The curvature tensor comes from a least-squares fit of normal
/// differences over the two-ring.
void compute_radial_curvature(const Mesh& mesh, const Camera& camera, VertexField& field);

/// Smooth in-face contour polylines. Segments never bifurcate: every
/// crossed interior mesh edge joins exactly two face segments, so components
/// are closed loops or end on the mesh boundary.
struct InterpolatedCurve {
  struct Endpoint {
    int edge = -1;   ///< mesh edge carrying the crossing
    double t = 0;    ///< parameter from edge.v0 toward edge.v1
    Vec3 position = Vec3::Zero();
  };
  struct FaceSegment {
    int face = -1;
    Endpoint a, b;
  };
  struct FoldMarker {
    int segment = -1;      ///< index into segments
    double t = 0;          ///< parameter along the segment a->b
    Vec3 position = Vec3::Zero();
  };

  std::vector<FaceSegment> segments;
  std::vector<std::vector<int>> chains;  ///< segment ids; closed loops or boundary-to-boundary
  std::vector<std::uint8_t> chain_closed;
  std::vector<FoldMarker> curtain_folds;
};

InterpolatedCurve extract_interpolated(const Mesh& mesh, const Camera& camera,
                                       const VertexField& field);

/// Marks curtain folds where the in-face g = 0 and radial-curvature = 0
/// chords intersect.
void interpolated_curtain_folds(InterpolatedCurve& curve, const Mesh& mesh,
                                const VertexField& field);

struct VoteStats {
  int ray_tests = 0;
  int grazing_retries = 0;
};

/// Voting visibility: sub-chains between curtain folds and boundary
/// endpoints get up to `votes_per_chain` ray tests at the nearest-to-camera
/// vertices of contour-bearing faces; the majority decides. Occluders
/// adjacent to the tested face are ignored.
std::vector<std::uint8_t> interpolated_visibility(const InterpolatedCurve& curve,
                                                  const Mesh& mesh, const Camera& camera,
                                                  const RayAccel& accel, int votes_per_chain,
                                                  VoteStats* stats = nullptr);

}  // namespace contourline
