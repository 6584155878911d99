#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstdint>

namespace contourline {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Result of an exact orientation test.
enum class Sign : int { Negative = -1, Zero = 0, Positive = 1 };

inline Sign sign_of(double v) {
  if (v > 0.0) return Sign::Positive;
  if (v < 0.0) return Sign::Negative;
  return Sign::Zero;
}

inline Sign flip(Sign s) { return static_cast<Sign>(-static_cast<int>(s)); }

inline int sign_int(Sign s) { return static_cast<int>(s); }

/// Eye of a camera for exact sidedness tests: either a finite point
/// (perspective center) or a point at infinity along a direction
/// (orthographic). `v` is the position, or the direction toward the eye.
struct Eye {
  bool infinite = false;
  Vec3 v = Vec3::Zero();

  static Eye point(const Vec3& p) { return Eye{false, p}; }
  static Eye at_infinity(const Vec3& toward) { return Eye{true, toward}; }
};

}  // namespace contourline
