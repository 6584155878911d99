#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <random>

#include "contourline/errors.hpp"
#include "contourline/predicates.hpp"

using namespace contourline;

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational rat(double v) { return Rational(v); }

// Exact rational evaluation of det(a-d, b-d, c-d).
int orient3d_rational(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const Rational adx = rat(a.x()) - rat(d.x()), ady = rat(a.y()) - rat(d.y()),
                 adz = rat(a.z()) - rat(d.z());
  const Rational bdx = rat(b.x()) - rat(d.x()), bdy = rat(b.y()) - rat(d.y()),
                 bdz = rat(b.z()) - rat(d.z());
  const Rational cdx = rat(c.x()) - rat(d.x()), cdy = rat(c.y()) - rat(d.y()),
                 cdz = rat(c.z()) - rat(d.z());
  const Rational det = adx * (bdy * cdz - bdz * cdy) - ady * (bdx * cdz - bdz * cdx) +
                       adz * (bdx * cdy - bdy * cdx);
  return det.sign();
}

int orient2d_rational(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Rational det = (rat(a.x()) - rat(c.x())) * (rat(b.y()) - rat(c.y())) -
                       (rat(a.y()) - rat(c.y())) * (rat(b.x()) - rat(c.x()));
  return det.sign();
}

double nudge_ulps(double v, int ulps, std::mt19937_64& rng) {
  for (int i = 0; i < ulps; i++) {
    const bool up = rng() & 1;
    v = std::nextafter(v, up ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity());
  }
  return v;
}

}  // namespace

TEST_CASE("orient3d on the canonical tetrahedron") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0), d(0, 0, 1);
  CHECK(orient3d(a, b, c, d) == Sign::Negative);
  CHECK(orient3d(a, b, c, Vec3(0.25, 0.25, 0)) == Sign::Zero);  // coplanar
}

TEST_CASE("orient3d flips under argument transpositions") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-10, 10);
  auto point = [&] { return Vec3(uni(rng), uni(rng), uni(rng)); };
  for (int i = 0; i < 10000; i++) {
    Vec3 p[4] = {point(), point(), point(), point()};
    const Sign base = orient3d(p[0], p[1], p[2], p[3]);
    const int swaps[][2] = {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}, {1, 3}};
    const auto& sw = swaps[i % 6];
    Vec3 q[4] = {p[0], p[1], p[2], p[3]};
    std::swap(q[sw[0]], q[sw[1]]);
    CHECK(orient3d(q[0], q[1], q[2], q[3]) == flip(base));
  }
}

TEST_CASE("orient3d matches the rational oracle on near-coplanar input") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-4, 4);
  int disagreements = 0;
  for (int i = 0; i < 10000; i++) {
    // points in a plane, then each coordinate shifted by up to one ulp
    const Vec3 origin(uni(rng), uni(rng), uni(rng));
    const Vec3 e1(uni(rng), uni(rng), uni(rng));
    const Vec3 e2(uni(rng), uni(rng), uni(rng));
    Vec3 p[4];
    for (auto& q : p) {
      q = origin + uni(rng) * e1 + uni(rng) * e2;
      for (int k = 0; k < 3; k++) q[k] = nudge_ulps(q[k], rng() % 2, rng);
    }
    const Sign mine = orient3d(p[0], p[1], p[2], p[3]);
    const int oracle = orient3d_rational(p[0], p[1], p[2], p[3]);
    if (static_cast<int>(mine) != oracle) disagreements++;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("orient2d basics and exactness") {
  CHECK(orient2d(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)) == Sign::Positive);
  CHECK(orient2d(Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)) == Sign::Zero);
  CHECK(orient2d(Vec2(0, 0), Vec2(0, 1), Vec2(1, 0)) == Sign::Negative);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> uni(-2, 2);
  int disagreements = 0;
  for (int i = 0; i < 10000; i++) {
    const Vec2 a(uni(rng), uni(rng));
    const Vec2 dir(uni(rng), uni(rng));
    Vec2 b = a + uni(rng) * dir;
    Vec2 c = a + uni(rng) * dir;  // collinear, then nudged
    b.x() = nudge_ulps(b.x(), rng() % 2, rng);
    c.y() = nudge_ulps(c.y(), rng() % 2, rng);
    if (static_cast<int>(orient2d(a, b, c)) != orient2d_rational(a, b, c)) disagreements++;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("front_side equals negated orient3d") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(-5, 5);
  auto point = [&] { return Vec3(uni(rng), uni(rng), uni(rng)); };
  for (int i = 0; i < 1000; i++) {
    const Vec3 a = point(), b = point(), c = point(), d = point();
    CHECK(front_side(a, b, c, d) == flip(orient3d(a, b, c, d)));
  }
  // d along the normal of a ccw triangle is on the front side
  CHECK(front_side(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)) ==
        Sign::Positive);
  CHECK(front_side(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1)) ==
        Sign::Negative);
  CHECK(front_side(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0.3, 0.3, 0)) ==
        Sign::Zero);
}

TEST_CASE("same_side") {
  const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(same_side(a, b, c, Vec3(0, 0, 1), Vec3(0, 0, 2)));
  CHECK_FALSE(same_side(a, b, c, Vec3(0, 0, 1), Vec3(0, 0, -1)));
  CHECK(same_side(a, b, c, Vec3(0.1, 0.1, 1), Vec3(0.1, 0.1, 1)));  // d == e
  CHECK_THROWS_AS(same_side(a, b, c, Vec3(0.5, 0.5, 0), Vec3(0, 0, 1)), ZeroOrientation);
}

TEST_CASE("orient3d_eye at infinity matches far finite points") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> uni(-3, 3);
  auto point = [&] { return Vec3(uni(rng), uni(rng), uni(rng)); };
  for (int i = 0; i < 500; i++) {
    const Vec3 a = point(), b = point(), c = point();
    Vec3 dir = point();
    if (dir.norm() < 1e-6) continue;
    dir.normalize();
    const Sign at_inf = orient3d_eye(a, b, c, Eye::at_infinity(dir));
    const Sign far_pt = orient3d(a, b, c, 1e8 * dir);
    if (far_pt != Sign::Zero) CHECK(at_inf == far_pt);
  }
}

TEST_CASE("segments_intersect_2d") {
  SUBCASE("symmetric X crossing") {
    const auto hit = segments_intersect_2d(Vec2(0, 0), Vec2(2, 2), Vec2(0, 2), Vec2(2, 0));
    REQUIRE(hit.has_value());
    CHECK(hit->s == doctest::Approx(0.5));
    CHECK(hit->t == doctest::Approx(0.5));
    CHECK(hit->point.x() == doctest::Approx(1.0));
    CHECK(hit->point.y() == doctest::Approx(1.0));
  }
  SUBCASE("parallel") {
    CHECK_FALSE(segments_intersect_2d(Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1)));
  }
  SUBCASE("T-contact is not a crossing") {
    // endpoint of one segment in the interior of the other
    CHECK_FALSE(segments_intersect_2d(Vec2(0, 0), Vec2(2, 0), Vec2(1, 0), Vec2(1, 1)));
    CHECK_FALSE(segments_intersect_2d(Vec2(1, 0), Vec2(1, 1), Vec2(0, 0), Vec2(2, 0)));
  }
  SUBCASE("shared endpoints are logical intersections") {
    CHECK_THROWS_AS(segments_intersect_2d(Vec2(0, 0), Vec2(1, 0), Vec2(0, 0), Vec2(0, 1)),
                    SharedEndpoint);
  }
  SUBCASE("agrees with a parametric solver on random pairs") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-1, 1);
    int checked = 0;
    for (int i = 0; i < 10000; i++) {
      const Vec2 a(uni(rng), uni(rng)), b(uni(rng), uni(rng));
      const Vec2 d(uni(rng), uni(rng)), e(uni(rng), uni(rng));
      const Vec2 r = b - a, q = e - d, w = d - a;
      const double denom = r.x() * q.y() - r.y() * q.x();
      if (denom == 0) continue;
      const double s = (w.x() * q.y() - w.y() * q.x()) / denom;
      const double t = -(w.x() * r.y() - w.y() * r.x()) / denom;
      const double margin =
          std::min({std::fabs(s), std::fabs(1 - s), std::fabs(t), std::fabs(1 - t)});
      if (margin < 1e-9) continue;  // too close to an endpoint for the float solver to vouch
      const bool proper = s > 0 && s < 1 && t > 0 && t < 1;
      const auto hit = segments_intersect_2d(a, b, d, e);
      CHECK(hit.has_value() == proper);
      if (hit && proper) {
        CHECK(hit->s == doctest::Approx(s).epsilon(1e-9));
        CHECK(hit->t == doctest::Approx(t).epsilon(1e-9));
      }
      checked++;
    }
    CHECK(checked > 9000);
  }
}

TEST_CASE("edge_occluded_by_face") {
  // triangle pqr in the z = 1 plane, camera above it at z = 5
  const Vec3 p(0, 0, 1), q(2, -1, 1), r(2, 1, 1);
  const Eye cam = Eye::point(Vec3(1, 0, 5));

  SUBCASE("edge behind the triangle interior is occluded") {
    const Vec3 e(1.2, 0, -2);  // below the plane, projecting inside the wedge
    CHECK(edge_occluded_by_face(p, e, q, r, cam));
  }
  SUBCASE("edge on the camera side fails the plane test") {
    const Vec3 e(1.2, 0, 3);
    CHECK_FALSE(edge_occluded_by_face(p, e, q, r, cam));
  }
  SUBCASE("edge outside the wedge fails a clipping test") {
    const Vec3 e(-2, 3, -2);
    CHECK_FALSE(edge_occluded_by_face(p, e, q, r, cam));
  }
  SUBCASE("matches a ray oracle into the local wedge at p") {
    // occluded: the segment e -> camera pierces the plane of pqr inside the
    // infinite sector spanned at p by (q - p) and (r - p); the far rim qr
    // never matters because the edge emanates from p itself
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uni(-1, 1);
    int agree = 0, total = 0;
    for (int i = 0; i < 2000; i++) {
      const Vec3 pp(uni(rng), uni(rng), uni(rng));
      const Vec3 qq = pp + Vec3(uni(rng), uni(rng), uni(rng));
      const Vec3 rr = pp + Vec3(uni(rng), uni(rng), uni(rng));
      const Vec3 ee = pp + Vec3(uni(rng), uni(rng), uni(rng));
      const Vec3 cc(4 * uni(rng), 4 * uni(rng), 4 + uni(rng));
      bool mine;
      try {
        mine = edge_occluded_by_face(pp, ee, qq, rr, Eye::point(cc));
      } catch (const ZeroOrientation&) {
        continue;
      }
      const Vec3 n = (qq - pp).cross(rr - pp);
      const double de = (ee - pp).dot(n), dc = (cc - pp).dot(n);
      if (std::fabs(de) < 1e-9 || std::fabs(dc) < 1e-9) continue;
      bool oracle = false;
      if (de * dc < 0) {
        const double t = de / (de - dc);
        const Vec3 x = ee + t * (cc - ee);
        const Vec3 v0 = qq - pp, v1 = rr - pp, v2 = x - pp;
        const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
        const double d20 = v2.dot(v0), d21 = v2.dot(v1);
        const double denom = d00 * d11 - d01 * d01;
        if (std::fabs(denom) < 1e-12) continue;
        const double bv = (d11 * d20 - d01 * d21) / denom;
        const double bw = (d00 * d21 - d01 * d20) / denom;
        if (std::min(std::fabs(bv), std::fabs(bw)) < 1e-7) continue;  // borderline
        oracle = bv > 0 && bw > 0;
      }
      total++;
      if (mine == oracle) agree++;
    }
    CHECK(total > 500);
    CHECK(agree == total);
  }
}
