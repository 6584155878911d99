#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contourline/types.hpp"
#include "contourline/view_graph.hpp"

namespace contourline {

class RayAccel;

/// Image-plane window to canvas pixels (y grows downward).
struct PixelMap {
  double half_extent = 1.0;  ///< plane window is [-half, half]^2
  int canvas = 1024;

  double scale() const { return canvas / (2.0 * half_extent); }
  Vec2 to_px(const Vec2& uv) const {
    return Vec2((uv.x() + half_extent) * scale(), (half_extent - uv.y()) * scale());
  }
};

/// Ordered run of co-visible segments between singularities.
struct Chain {
  std::vector<int> segments;
  std::vector<std::uint8_t> reversed;  ///< per segment: traversed head->tail
  bool closed = false;
  int end_node[2] = {-1, -1};  ///< singularity ids; -1 free end
  Visibility vis = Visibility::Unknown;
  std::vector<Vec2> polyline_px;
  double arclength_px = 0;
  /// T-junction attachments along this chain (arc parameter in [0,1], pixel
  /// position); smoothing can be constrained through them
  std::vector<std::pair<double, Vec2>> anchors;
};

enum class ChainPolicy { Default, SilhouetteOnly };

/// Greedy chaining. Stops at curtain folds and far sides of T-junctions,
/// passes through near sides, follows contours through Y-junctions when a
/// single contour continuation exists, and stops boundaries there.
/// Invisible chains are built too (hidden-line rendering wants them).
std::vector<Chain> build_chains(const ViewGraph& graph, const PixelMap& px,
                                ChainPolicy policy = ChainPolicy::Default,
                                const RayAccel* accel = nullptr);

struct SimplifyReport {
  int iterations = 0;
  int removed_junction_deadend = 0;
  int removed_deadend_deadend = 0;
  int removed_self_loop = 0;
  int removed_overlap = 0;
  int total_removed() const {
    return removed_junction_deadend + removed_deadend_deadend + removed_self_loop +
           removed_overlap;
  }
};

/// Marks short junction-free runs invisible when they connect a junction to
/// a dead-end, a dead-end to a dead-end, a node to itself, or duplicate
/// another chain in image space. Iterates to a fixpoint and rebuilds chains.
SimplifyReport simplify_topology(ViewGraph& graph, std::vector<Chain>& chains,
                                 double threshold_px, const PixelMap& px);

struct SmoothParams {
  double min_spacing_px = 2.0;      ///< merge control points closer than this
  double control_spacing_px = 12.0; ///< one spline control per this much arc
  double sample_spacing_px = 1.5;   ///< output sampling density
  bool junction_lock = true;        ///< pin endpoints and T-junction anchors
};

struct Stroke {
  std::vector<Vec2> center;       ///< dense samples, pixels
  std::vector<double> half_width; ///< per sample
  std::vector<Vec2> ribs;         ///< perpendicular offsets scaled by half width
  bool closed = false;
  Visibility vis = Visibility::Visible;
  int fold_clamps = 0;  ///< ribs clamped where curvature beats half width
};

Stroke smooth_chain(const Chain& chain, const SmoothParams& params);

struct WidthProfile {
  double half_width_px = 1.0;
  bool taper = false;  ///< w(t) = 4 t (1-t) * half_width

  double eval(double t) const { return taper ? 4.0 * t * (1.0 - t) * half_width_px : half_width_px; }
};

/// Rib vectors perpendicular to the local chord, clamped where the radius of
// curvature falls below the half width.
void build_ribs(Stroke& stroke, const WidthProfile& profile);

/// JSON chain dump for debugging.
std::string dump_chains(std::span<const Chain> chains);

struct StrokeStyle {
  std::string color = "#1b1b1b";
  double opacity = 1.0;
  double width_px = 1.5;
  bool taper = false;
  std::vector<double> dash;
};

struct DocStyle {
  StrokeStyle visible;
  StrokeStyle hidden{.color = "#8a8a8a", .opacity = 1.0, .width_px = 0.8, .taper = false,
                     .dash = {4.0, 3.0}};
  std::string background = "#ffffff";
};

/// Deterministic SVG 1.1 document; one path per stroke in input order.
/// Constant-width strokes are stroked polylines, tapered ones filled
/// rib-outline polygons; hidden strokes use the dashed hidden style.
std::string emit_svg(std::span<const Stroke> strokes, const DocStyle& style, int canvas_w,
                     int canvas_h);

}  // namespace contourline
