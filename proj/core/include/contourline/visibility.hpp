#pragma once

#include <span>
#include <vector>

#include "contourline/bvh.hpp"
#include "contourline/types.hpp"
#include "contourline/view_graph.hpp"

namespace contourline {

struct VisibilityStats {
  long ray_tests = 0;
  long propagated_segments = 0;
  long qi_conflicts = 0;
  long grazing_retries = 0;
};

/// Occluder count (quantitative invisibility) of a surface point: the number
/// of non-excluded triangles crossed strictly between p and the camera.
/// Throws GrazingHit on exact edge contact; callers retry along their curve.
int ray_test(const RayAccel& accel, const Mesh& mesh, const Camera& camera, const Vec3& p,
             std::span<const int> exclusions, VisibilityStats* stats = nullptr);

/// Ray test at parameter t of a segment, retrying up to three nudged
/// parameters when the ray grazes geometry.
int ray_test_on_segment(const RayAccel& accel, const ViewGraph& graph, int segment, double t,
                        VisibilityStats* stats = nullptr);

/// Concave contour segments and boundary segments on back-faces can never be
/// visible; marks them and records the QI lower bound of 1.
void mark_locally_invisible(ViewGraph& graph);

enum class PropagationMode { PerChain, PerSegment };

/// PerChain: one midpoint ray test per singularity-free chain, copied along
/// the chain. PerSegment: an independent test per segment (the oracle path).
void propagate_visibility(ViewGraph& graph, const RayAccel& accel, PropagationMode mode,
                          VisibilityStats* stats = nullptr);

/// Voting variant of per-chain propagation: up to `votes` tests spread along
/// each chain, majority wins. Interpolated segments are probed at the
/// nearest-to-camera vertex of their face with the face neighborhood
/// excluded; mesh curves at their midpoints.
void propagate_votes(ViewGraph& graph, const RayAccel& accel, int votes,
                     VisibilityStats* stats = nullptr);

/// Seeds each connected component (extremal image-space segments are
/// visible; otherwise one ray test) and pushes QI values through the
/// singularity rules. Components where two paths disagree fall back to
/// per-segment ray tests and bump qi_conflicts.
void propagate_qi(ViewGraph& graph, const RayAccel& accel, VisibilityStats* stats = nullptr);

/// Maximal visible runs as 2D polylines; requires resolved visibility.
std::vector<std::vector<Vec2>> visible_polylines(const ViewGraph& graph);

}  // namespace contourline
