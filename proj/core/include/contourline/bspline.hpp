#pragma once

#include <span>
#include <utility>
#include <vector>

#include "contourline/types.hpp"

namespace contourline {

/// Least-squares cubic B-spline over 2D polylines. Open splines use clamped
/// uniform knots; closed splines use a periodic basis.
class CubicBSpline2 {
 public:
  /// `constraints` are (parameter, position) interpolation conditions; for
  /// open fits with `lock_ends`, the first and last input points are pinned.
  static CubicBSpline2 fit_open(std::span<const Vec2> points, std::span<const double> params,
                                int num_controls, bool lock_ends,
                                std::span<const std::pair<double, Vec2>> constraints = {});
  static CubicBSpline2 fit_periodic(std::span<const Vec2> points, std::span<const double> params,
                                    int num_controls,
                                    std::span<const std::pair<double, Vec2>> constraints = {});

  Vec2 evaluate(double t) const;
  std::vector<Vec2> sample(int count) const;
  bool periodic() const { return periodic_; }
  int control_count() const { return static_cast<int>(controls_.size()); }

 private:
  std::vector<Vec2> controls_;
  std::vector<double> knots_;
  bool periodic_ = false;

  void basis_row(double t, int& first, double out[4]) const;
};

/// Chord-length parameters in [0, 1].
std::vector<double> chord_length_params(std::span<const Vec2> points);

}  // namespace contourline
