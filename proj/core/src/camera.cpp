#include "contourline/camera.hpp"

#include <cmath>

#include "contourline/errors.hpp"

namespace contourline {

namespace {

void look_at_frame(const Vec3& forward, const Vec3& up_hint, Vec3& right, Vec3& up) {
  right = forward.cross(up_hint);
  if (right.squaredNorm() < 1e-24) {
    // view direction parallel to the up hint; pick any stable fallback
    const Vec3 alt = std::fabs(forward.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    right = forward.cross(alt);
  }
  right.normalize();
  up = right.cross(forward).normalized();
}

}  // namespace

Camera Camera::perspective(const Vec3& center, const Vec3& target, const Vec3& up,
                           double plane_dist) {
  Camera cam;
  cam.kind_ = Kind::Perspective;
  cam.center_ = center;
  const Vec3 forward = (target - center).normalized();
  Vec3 right, true_up;
  look_at_frame(forward, up, right, true_up);
  cam.plane_origin_ = center + plane_dist * forward;
  cam.plane_u_ = right;
  cam.plane_w_ = true_up;
  cam.plane_normal_ = cam.plane_u_.cross(cam.plane_w_);
  cam.d0_ = (cam.plane_origin_ - center).dot(cam.plane_normal_);
  cam.direction_ = forward;
  return cam;
}

Camera Camera::orthographic(const Vec3& direction, const Vec3& plane_point, const Vec3& up) {
  Camera cam;
  cam.kind_ = Kind::Orthographic;
  cam.direction_ = direction.normalized();
  Vec3 right, true_up;
  look_at_frame(cam.direction_, up, right, true_up);
  cam.plane_origin_ = plane_point;
  cam.plane_u_ = right;
  cam.plane_w_ = true_up;
  cam.plane_normal_ = cam.plane_u_.cross(cam.plane_w_);
  cam.d0_ = 0.0;
  return cam;
}

Eye Camera::eye() const {
  if (kind_ == Kind::Perspective) return Eye::point(center_);
  return Eye::at_infinity(-direction_);
}

Camera::Projected Camera::project(const Vec3& p) const {
  Projected out;
  if (kind_ == Kind::Perspective) {
    const double dp = (p - center_).dot(plane_normal_);
    if (dp == 0.0 || (dp > 0.0) != (d0_ > 0.0)) throw BehindCamera{};
    const double t = d0_ / dp;
    const Vec3 x = center_ + t * (p - center_);
    out.uv = Vec2((x - plane_origin_).dot(plane_u_), (x - plane_origin_).dot(plane_w_));
    out.depth = (p - center_).squaredNorm();
  } else {
    const double vn = direction_.dot(plane_normal_);
    const double t = (plane_origin_ - p).dot(plane_normal_) / vn;
    const Vec3 x = p + t * direction_;
    out.uv = Vec2((x - plane_origin_).dot(plane_u_), (x - plane_origin_).dot(plane_w_));
    out.depth = (p - plane_origin_).dot(plane_normal_) / vn;
  }
  return out;
}

Camera Camera::with_plane_scale(double s) const {
  Camera cam = *this;
  cam.plane_u_ *= s;
  cam.plane_w_ *= s;
  cam.plane_normal_ = cam.plane_u_.cross(cam.plane_w_);
  cam.d0_ = cam.kind_ == Kind::Perspective
                ? (cam.plane_origin_ - cam.center_).dot(cam.plane_normal_)
                : 0.0;
  return cam;
}

}  // namespace contourline
