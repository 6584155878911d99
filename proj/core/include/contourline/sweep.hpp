#pragma once

#include <functional>
#include <span>
#include <vector>

#include "contourline/types.hpp"

namespace contourline {

struct SweepSegment {
  Vec2 a = Vec2::Zero();
  Vec2 b = Vec2::Zero();
  int id = -1;
};

struct SweepCrossing {
  int first = -1;   ///< SweepSegment::id
  int second = -1;
};

/// Pairs may be excluded (mesh-adjacent curves, shared endpoints handled as
/// logical intersections). Only proper interior crossings are reported; the
/// decision is a four-sign orient2d test.
using ExclusionFn = std::function<bool(int, int)>;

/// Bentley-Ottmann sweep over the segments, events ordered by (y, x).
/// Status comparisons are exact; crossing events swap the pair in place.
std::vector<SweepCrossing> sweep_intersections(std::span<const SweepSegment> segments,
                                               const ExclusionFn& excluded = {});

/// Quadratic reference with the same predicate core and exclusion rules.
std::vector<SweepCrossing> brute_force_intersections(std::span<const SweepSegment> segments,
                                                     const ExclusionFn& excluded = {});

}  // namespace contourline
