#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contourline/camera.hpp"
#include "contourline/extraction.hpp"
#include "contourline/interpolated.hpp"
#include "contourline/mesh.hpp"
#include "contourline/types.hpp"

namespace contourline {

enum class CurveType { Contour, Boundary, InterpolatedContour };
enum class Visibility : std::uint8_t { Unknown, Visible, Invisible };

enum class SingKind {
  ImageIntersection,
  SurfaceIntersection,
  ContourCurtainFold,
  BoundaryCurtainFold,
  Bifurcation,
};

enum class IncidenceRole : std::uint8_t { Plain, Near, FarOccluded, FarFree };

/// Where one end of a segment attaches.
struct Link {
  enum class Kind : std::uint8_t { Free, Segment, Singularity };
  Kind kind = Kind::Free;
  int id = -1;         ///< segment or singularity id
  int other_end = -1;  ///< which end of the linked segment points back (0 tail, 1 head)
};

struct Segment {
  Vec3 p3[2];  ///< tail, head in scene space
  Vec2 p2[2];  ///< matching image-plane projections
  double depth[2] = {0, 0};

  CurveType type = CurveType::Contour;
  int mesh_edge = -1;  ///< source edge for mesh curves
  int mesh_face = -1;  ///< source face for interpolated curves
  /// endpoint provenance: a mesh vertex, or a point on a mesh edge
  struct SourcePoint {
    int vertex = -1;
    int edge = -1;
    double t = 0;
  } source[2];

  int parent = -1;              ///< original segment when this is a split child
  double t0 = 0.0, t1 = 1.0;    ///< parameter range on the original segment

  Link links[2];  ///< tail = 0, head = 1
  Visibility vis = Visibility::Unknown;
  int qi = -1;       ///< quantitative invisibility; -1 unknown
  int qi_lower = 0;  ///< known lower bound
  bool concave = false;           ///< contour edges only
  bool backface_boundary = false; ///< boundary edge whose single face is back-facing
  bool replaced = false;          ///< split into children; out of every traversal
};

struct Incidence {
  int segment = -1;
  int end = -1;  ///< -1 when the singularity sits mid-segment (unsplit near curve)
  IncidenceRole role = IncidenceRole::Plain;
};

struct Singularity {
  SingKind kind;
  Vec2 anchor2 = Vec2::Zero();
  Vec3 anchor3 = Vec3::Zero();
  int mesh_vertex = -1;  ///< for vertex-type singularities
  std::vector<Incidence> incident;

  // image-space intersections
  int near_segment = -1;
  double near_t = 0;       ///< parameter on the near segment (when unsplit)
  bool near_is_boundary = false;

  // curtain folds and Y-junctions: extra occluders of the far side
  int qi_step = 1;
  bool y_increment_audited = false;  ///< Y-junction increment came from the overlap test
};

struct GraphCounters {
  int curtain_folds = 0;
  int surface_intersections = 0;
  int bifurcations = 0;
  int image_intersections = 0;
  int split_segments = 0;
};

struct ViewGraph {
  std::vector<Segment> segments;
  std::vector<Singularity> singularities;
  const Mesh* mesh = nullptr;
  Camera camera;
  std::string method;  ///< provenance: brute | dual | random | interpolated
  std::uint64_t mesh_hash = 0;
  GraphCounters counters;

  int other_segment_at(int seg, int end) const;
};

/// One segment per curve edge (or per in-face interpolated segment), with
/// head/tail links wherever exactly two curve edges meet at a vertex.
ViewGraph build_segments(const ContourSet& contours, const Mesh& mesh, const Camera& camera);
ViewGraph build_segments(const InterpolatedCurve& curve, const Mesh& mesh, const Camera& camera);

/// Contour rule: a vertex joining a convex and a concave contour edge.
/// Boundary rule: one of the two boundary edges is occluded by a one-ring
/// face and the other is not (both occluded is the filtered spurious case).
void detect_curtain_folds(ViewGraph& graph);

/// Vertices shared by contour and boundary curves (Y-junctions), and
/// interpolated-contour endpoints lying on boundary mesh edges.
void detect_surface_intersections(ViewGraph& graph);

/// Mesh vertices with three or more incident contour edges.
void detect_bifurcations(ViewGraph& graph);

struct IntersectOptions {
  bool split_near = false;
};

/// Sweep-line pass over all segments: proper image-space crossings become
/// T-junction singularities; the far segment is split at each crossing.
void intersect_image_space(ViewGraph& graph, const IntersectOptions& opts = {});

/// JSON dump, schema "vg-1".
std::string dump_view_graph(const ViewGraph& graph);

}  // namespace contourline
