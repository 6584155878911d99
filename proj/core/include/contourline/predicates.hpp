#pragma once

// Exact geometric predicates: a floating-point filter with a Shewchuk-style
// error bound decides the easy cases, and an expansion-arithmetic fallback
// settles the rest without error. `Sign::Zero` is returned only when the
// underlying determinant is exactly zero.

#include <optional>

#include "contourline/types.hpp"

namespace contourline {

/// Sign of det(b - a, c - a): positive for counter-clockwise a, b, c.
Sign orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// Sign of det(a - d, b - d, c - d), the signed volume spanned by the three
/// difference vectors. Negative when d lies on the normal side of ccw abc.
Sign orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Sign of u . ((b - a) x (c - a)); an orientation test against a direction.
Sign orient_along(const Vec3& u, const Vec3& a, const Vec3& b, const Vec3& c);

/// orient3d where the fourth point may be a point at infinity.
Sign orient3d_eye(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& eye);

/// Positive iff d lies on the normal side of the counter-clockwise triangle
/// abc. Identical to -orient3d(a, b, c, d).
Sign front_side(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);
Sign front_side(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& eye);

/// True iff d and e lie strictly on the same side of the plane of abc.
/// Throws ZeroOrientation if either point is exactly on the plane.
bool same_side(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);
bool same_side(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& d, const Vec3& e);

/// Proper crossing of 2D segments ab and de. The decision is exact; the
/// parameters (s along ab, t along de) and the point are evaluated in
/// floating point only once the crossing is established. Endpoint contacts
/// and collinear overlaps are not crossings. Throws SharedEndpoint when the
/// segments share an endpoint bit-for-bit.
struct Crossing2d {
  double s = 0;  ///< parameter on ab
  double t = 0;  ///< parameter on de
  Vec2 point = Vec2::Zero();
};
std::optional<Crossing2d> segments_intersect_2d(const Vec2& a, const Vec2& b, const Vec2& d,
                                                const Vec2& e);

/// True iff the edge pe (sharing vertex p with the triangle pqr of p's
/// one-ring) is occluded by that triangle as seen from the eye. Three
/// clipping tests against the planes pqr, (eye,p,q) and (eye,p,r).
/// Throws ZeroOrientation on degenerate input.
bool edge_occluded_by_face(const Vec3& p, const Vec3& e, const Vec3& q, const Vec3& r,
                           const Eye& eye);

}  // namespace contourline
