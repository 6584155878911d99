#pragma once

#include "contourline/types.hpp"

namespace contourline {

/// Perspective (center point) or orthographic (direction) projection onto an
/// image plane given by an origin and two orthonormal in-plane axes.
class Camera {
 public:
  enum class Kind { Perspective, Orthographic };

  /// Right-handed look-at: forward toward `target`, `up` projected to be
  /// orthonormal. The image plane sits `plane_dist` in front of the center.
  static Camera perspective(const Vec3& center, const Vec3& target, const Vec3& up,
                            double plane_dist = 1.0);
  /// `direction` points from the eye toward the scene; the plane passes
  /// through `plane_point`.
  static Camera orthographic(const Vec3& direction, const Vec3& plane_point, const Vec3& up);

  Kind kind() const { return kind_; }
  const Vec3& center() const { return center_; }
  const Vec3& direction() const { return direction_; }
  const Vec3& plane_origin() const { return plane_origin_; }
  const Vec3& plane_u() const { return plane_u_; }
  const Vec3& plane_w() const { return plane_w_; }

  double near_clip = 0.0;
  double far_clip = 0.0;  ///< 0 = unbounded

  /// Eye for exact sidedness tests: the center, or a point at infinity
  /// opposite the view direction.
  Eye eye() const;

  struct Projected {
    Vec2 uv;       ///< image-plane coordinates
    double depth;  ///< monotone along every visual ray; for ordering only
  };
  /// Throws BehindCamera for points on the wrong side of a perspective center.
  Projected project(const Vec3& p) const;

  /// Scales the image plane window (and nothing else) by `s`.
  Camera with_plane_scale(double s) const;

 private:
  Kind kind_ = Kind::Perspective;
  Vec3 center_ = Vec3::Zero();     // perspective only
  Vec3 direction_ = Vec3::Zero();  // orthographic only, unit
  Vec3 plane_origin_ = Vec3::Zero();
  Vec3 plane_u_ = Vec3::UnitX();
  Vec3 plane_w_ = Vec3::UnitY();
  Vec3 plane_normal_ = Vec3::UnitZ();  // u x w
  double d0_ = 1.0;                    // (origin - center) . normal, perspective
};

}  // namespace contourline
