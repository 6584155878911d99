#include "contourline/sweep.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "contourline/predicates.hpp"
#include "expansion.hpp"

namespace contourline {

namespace {

using namespace detail;

struct Pt {
  double y, x;
  bool operator<(const Pt& o) const { return y < o.y || (y == o.y && x < o.x); }
  bool operator==(const Pt& o) const { return y == o.y && x == o.x; }
};

struct Seg {
  Vec2 lo, hi;  // (y, x)-lexicographic order
  int id;       // caller id
};

Pt point_of(const Vec2& v) { return Pt{v.y(), v.x()}; }

// Exact sign of x_s(y) - q where x_s is the abscissa of the segment at sweep
// height y and q is a double. Horizontal segments fall back to their nearest
// endpoint abscissa.
int compare_seg_x(const Seg& s, double y, double q) {
  const double ay = s.lo.y(), ax = s.lo.x();
  const double by = s.hi.y(), bx = s.hi.x();
  if (ay == by) {
    const double lo = std::min(ax, bx), hi = std::max(ax, bx);
    const double v = std::clamp(q, lo, hi);
    return v > q ? 1 : (v < q ? -1 : 0);
  }
  // sign of ax*(by-ay) + (y-ay)*(bx-ax) - q*(by-ay), exact
  double dy[2], dxe[2], yd[2];
  two_diff(by, ay, dy[1], dy[0]);
  two_diff(bx, ax, dxe[1], dxe[0]);
  two_diff(y, ay, yd[1], yd[0]);
  double t1[4];
  const int t1n = expansion_scale(2, dy, ax, t1);
  double t2[8], scr2[4 + 8];
  const int t2n = expansion_mul(2, yd, 2, dxe, t2, scr2, 8);
  double t3[4];
  int t3n = expansion_scale(2, dy, q, t3);
  t3n = expansion_negate(t3n, t3);
  double s12[12], total[16];
  const int s12n = expansion_sum(t1n, t1, t2n, t2, s12);
  const int tn = expansion_sum(s12n, s12, t3n, t3, total);
  return expansion_sign(tn, total);
}

// Exact slope comparison dx1/dy1 - dx2/dy2 with non-negative denominators.
int compare_slopes_exact(const Seg& s1, const Seg& s2) {
  double dx1[2], dy1[2], dx2[2], dy2[2];
  two_diff(s1.hi.x(), s1.lo.x(), dx1[1], dx1[0]);
  two_diff(s1.hi.y(), s1.lo.y(), dy1[1], dy1[0]);
  two_diff(s2.hi.x(), s2.lo.x(), dx2[1], dx2[0]);
  two_diff(s2.hi.y(), s2.lo.y(), dy2[1], dy2[0]);
  double lhs[8], rhs[8], scr[4 + 8], total[16];
  const int ln = expansion_mul(2, dx1, 2, dy2, lhs, scr, 8);
  int rn = expansion_mul(2, dx2, 2, dy1, rhs, scr, 8);
  rn = expansion_negate(rn, rhs);
  const int tn = expansion_sum(ln, lhs, rn, rhs, total);
  return expansion_sign(tn, total);
}

bool proper_crossing(const Seg& s1, const Seg& s2) {
  const Sign a = orient2d(s1.lo, s1.hi, s2.lo);
  const Sign b = orient2d(s1.lo, s1.hi, s2.hi);
  if (a == b || a == Sign::Zero || b == Sign::Zero) return false;
  const Sign c = orient2d(s2.lo, s2.hi, s1.lo);
  const Sign d = orient2d(s2.lo, s2.hi, s1.hi);
  return c != d && c != Sign::Zero && d != Sign::Zero;
}

bool shares_endpoint(const Seg& s1, const Seg& s2) {
  return s1.lo == s2.lo || s1.lo == s2.hi || s1.hi == s2.lo || s1.hi == s2.hi;
}

struct Event {
  std::vector<int> starts;                     // local segment indices
  std::vector<int> ends;
  std::vector<std::pair<int, int>> crossings;  // local index pairs to swap
};

}  // namespace

std::vector<SweepCrossing> sweep_intersections(std::span<const SweepSegment> segments,
                                               const ExclusionFn& excluded) {
  std::vector<Seg> segs;
  segs.reserve(segments.size());
  std::vector<int> local_of;
  for (const auto& in : segments) {
    const Pt pa = point_of(in.a), pb = point_of(in.b);
    if (pa == pb) continue;  // degenerate projection, cannot cross properly
    Seg s;
    if (pa < pb) {
      s.lo = in.a;
      s.hi = in.b;
    } else {
      s.lo = in.b;
      s.hi = in.a;
    }
    s.id = in.id;
    segs.push_back(s);
  }

  auto pair_excluded = [&](int i, int j) {
    if (excluded && excluded(segs[i].id, segs[j].id)) return true;
    return shares_endpoint(segs[i], segs[j]);
  };

  std::map<Pt, Event> queue;
  for (int i = 0; i < static_cast<int>(segs.size()); i++) {
    queue[point_of(segs[i].lo)].starts.push_back(i);
    queue[point_of(segs[i].hi)].ends.push_back(i);
  }

  std::vector<int> status;  // local indices ordered left to right
  std::set<std::pair<int, int>> found;
  std::vector<SweepCrossing> out;

  auto try_pair = [&](int i, int j, const Pt& now) {
    if (i < 0 || j < 0 || pair_excluded(i, j)) return;
    if (!proper_crossing(segs[i], segs[j])) return;
    const auto key = std::minmax(segs[i].id, segs[j].id);
    if (!found.insert(key).second) return;  // already known, swap already scheduled
    out.push_back({key.first, key.second});
    // schedule the order swap at the crossing point if it lies ahead
    const Vec2 r = segs[i].hi - segs[i].lo;
    const Vec2 q = segs[j].hi - segs[j].lo;
    const Vec2 w = segs[j].lo - segs[i].lo;
    const double denom = r.x() * q.y() - r.y() * q.x();
    const double t = (w.x() * q.y() - w.y() * q.x()) / denom;
    const Vec2 cp = segs[i].lo + t * r;
    const Pt cpt = point_of(cp);
    if (now < cpt) queue[cpt].crossings.emplace_back(i, j);
  };

  auto position_of = [&](int i) {
    return static_cast<int>(std::find(status.begin(), status.end(), i) - status.begin());
  };

  while (!queue.empty()) {
    const auto it = queue.begin();
    const Pt p = it->first;
    Event ev = std::move(it->second);
    queue.erase(it);

    // crossing swaps first: reorder pairs in place, then probe new neighbors
    for (auto [i, j] : ev.crossings) {
      int pi = position_of(i);
      int pj = position_of(j);
      const int n = static_cast<int>(status.size());
      if (pi >= n || pj >= n) continue;  // already removed at this point
      if (pi > pj) std::swap(pi, pj);
      std::swap(status[pi], status[pj]);
      if (pi > 0) try_pair(status[pi - 1], status[pi], p);
      if (pj + 1 < n) try_pair(status[pj], status[pj + 1], p);
    }

    for (int i : ev.ends) {
      const int pos = position_of(i);
      if (pos >= static_cast<int>(status.size())) continue;
      status.erase(status.begin() + pos);
      if (pos > 0 && pos < static_cast<int>(status.size()))
        try_pair(status[pos - 1], status[pos], p);
    }

    for (int i : ev.starts) {
      // insertion point by exact comparison at the event height; ties by
      // slope so the order matches positions just above the sweep line
      const double y = p.y;
      int lo = 0, hi = static_cast<int>(status.size());
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        const Seg& m = segs[status[mid]];
        int cmp = compare_seg_x(m, y, segs[i].lo.x());
        if (cmp == 0) cmp = -compare_slopes_exact(segs[i], m);
        if (cmp == 0) cmp = m.id < segs[i].id ? -1 : 1;
        if (cmp < 0)
          lo = mid + 1;
        else
          hi = mid;
      }
      status.insert(status.begin() + lo, i);
      if (lo > 0) try_pair(status[lo - 1], status[lo], p);
      if (lo + 1 < static_cast<int>(status.size())) try_pair(status[lo], status[lo + 1], p);
    }
  }

  std::sort(out.begin(), out.end(), [](const SweepCrossing& a, const SweepCrossing& b) {
    return a.first < b.first || (a.first == b.first && a.second < b.second);
  });
  return out;
}

std::vector<SweepCrossing> brute_force_intersections(std::span<const SweepSegment> segments,
                                                     const ExclusionFn& excluded) {
  std::vector<Seg> segs;
  for (const auto& in : segments) {
    const Pt pa = point_of(in.a), pb = point_of(in.b);
    if (pa == pb) continue;
    Seg s;
    if (pa < pb) {
      s.lo = in.a;
      s.hi = in.b;
    } else {
      s.lo = in.b;
      s.hi = in.a;
    }
    s.id = in.id;
    segs.push_back(s);
  }
  std::vector<SweepCrossing> out;
  for (std::size_t i = 0; i < segs.size(); i++) {
    for (std::size_t j = i + 1; j < segs.size(); j++) {
      if (excluded && excluded(segs[i].id, segs[j].id)) continue;
      if (shares_endpoint(segs[i], segs[j])) continue;
      // cheap reject before the exact test
      if (std::min(segs[i].lo.y(), segs[i].hi.y()) > std::max(segs[j].lo.y(), segs[j].hi.y()))
        continue;
      if (std::min(segs[j].lo.y(), segs[j].hi.y()) > std::max(segs[i].lo.y(), segs[i].hi.y()))
        continue;
      if (std::min(segs[i].lo.x(), segs[i].hi.x()) > std::max(segs[j].lo.x(), segs[j].hi.x()))
        continue;
      if (std::min(segs[j].lo.x(), segs[j].hi.x()) > std::max(segs[i].lo.x(), segs[i].hi.x()))
        continue;
      if (proper_crossing(segs[i], segs[j])) {
        const auto key = std::minmax(segs[i].id, segs[j].id);
        out.push_back({key.first, key.second});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const SweepCrossing& a, const SweepCrossing& b) {
    return a.first < b.first || (a.first == b.first && a.second < b.second);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const SweepCrossing& a, const SweepCrossing& b) {
                          return a.first == b.first && a.second == b.second;
                        }),
            out.end());
  return out;
}

}  // namespace contourline
