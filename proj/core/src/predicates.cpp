#include "contourline/predicates.hpp"

#include <cmath>
#include <limits>

#include "contourline/errors.hpp"
#include "expansion.hpp"

namespace contourline {
namespace {

using namespace detail;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
const double kCcwErrBoundA = (3.0 + 16.0 * kEps) * kEps;
const double kO3dErrBoundA = (7.0 + 56.0 * kEps) * kEps;

// Product of two two-component expansions; h must hold 8 doubles.
int mul22(const double* e, const double* f, double* h) {
  double scratch[4 + 8];
  return expansion_mul(2, e, 2, f, h, scratch, 8);
}

Sign orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  double acx[2], acy[2], bcx[2], bcy[2];
  two_diff(a.x(), c.x(), acx[1], acx[0]);
  two_diff(a.y(), c.y(), acy[1], acy[0]);
  two_diff(b.x(), c.x(), bcx[1], bcx[0]);
  two_diff(b.y(), c.y(), bcy[1], bcy[0]);
  double left[8], right[8], det[16];
  const int llen = mul22(acx, bcy, left);
  int rlen = mul22(acy, bcx, right);
  rlen = expansion_negate(rlen, right);
  const int dlen = expansion_sum(llen, left, rlen, right, det);
  return static_cast<Sign>(expansion_sign(dlen, det));
}

// det = adz*(bdx*cdy - bdy*cdx) + bdz*(cdx*ady - cdy*adx) + cdz*(adx*bdy - ady*bdx)
// where each difference is an exact two-component expansion.
Sign orient3d_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  double adx[2], ady[2], adz[2], bdx[2], bdy[2], bdz[2], cdx[2], cdy[2], cdz[2];
  two_diff(a.x(), d.x(), adx[1], adx[0]);
  two_diff(a.y(), d.y(), ady[1], ady[0]);
  two_diff(a.z(), d.z(), adz[1], adz[0]);
  two_diff(b.x(), d.x(), bdx[1], bdx[0]);
  two_diff(b.y(), d.y(), bdy[1], bdy[0]);
  two_diff(b.z(), d.z(), bdz[1], bdz[0]);
  two_diff(c.x(), d.x(), cdx[1], cdx[0]);
  two_diff(c.y(), d.y(), cdy[1], cdy[0]);
  two_diff(c.z(), d.z(), cdz[1], cdz[0]);

  double t1[8], t2[8], minor[16];
  double term[64], scratch[2 * 16 + 64];
  double acc1[128], acc2[192];

  auto minor_of = [&](const double* px, const double* qy, const double* py, const double* qx,
                      double* out) {
    const int l1 = mul22(px, qy, t1);
    int l2 = mul22(py, qx, t2);
    l2 = expansion_negate(l2, t2);
    return expansion_sum(l1, t1, l2, t2, out);
  };

  const int m1len = minor_of(bdx, cdy, bdy, cdx, minor);
  int len = expansion_mul(m1len, minor, 2, adz, term, scratch, 64);
  double det1[64];
  for (int i = 0; i < len; i++) det1[i] = term[i];
  const int d1len = len;

  const int m2len = minor_of(cdx, ady, cdy, adx, minor);
  len = expansion_mul(m2len, minor, 2, bdz, term, scratch, 64);
  const int partial = expansion_sum(d1len, det1, len, term, acc1);

  const int m3len = minor_of(adx, bdy, ady, bdx, minor);
  len = expansion_mul(m3len, minor, 2, cdz, term, scratch, 64);
  const int total = expansion_sum(partial, acc1, len, term, acc2);
  return static_cast<Sign>(expansion_sign(total, acc2));
}

// det(u, b - a, c - a) with exact difference expansions; u enters exactly.
Sign orient_along_exact(const Vec3& u, const Vec3& a, const Vec3& b, const Vec3& c) {
  double bax[2], bay[2], baz[2], cax[2], cay[2], caz[2];
  two_diff(b.x(), a.x(), bax[1], bax[0]);
  two_diff(b.y(), a.y(), bay[1], bay[0]);
  two_diff(b.z(), a.z(), baz[1], baz[0]);
  two_diff(c.x(), a.x(), cax[1], cax[0]);
  two_diff(c.y(), a.y(), cay[1], cay[0]);
  two_diff(c.z(), a.z(), caz[1], caz[0]);

  double t1[8], t2[8], minor[16], term[32];
  double acc1[64], acc2[96];

  auto minor_of = [&](const double* px, const double* qy, const double* py, const double* qx,
                      double* out) {
    const int l1 = mul22(px, qy, t1);
    int l2 = mul22(py, qx, t2);
    l2 = expansion_negate(l2, t2);
    return expansion_sum(l1, t1, l2, t2, out);
  };

  int mlen = minor_of(bay, caz, baz, cay, minor);
  int len = expansion_scale(mlen, minor, u.x(), term);
  double det1[32];
  for (int i = 0; i < len; i++) det1[i] = term[i];
  const int d1len = len;

  mlen = minor_of(baz, cax, bax, caz, minor);
  len = expansion_scale(mlen, minor, u.y(), term);
  const int partial = expansion_sum(d1len, det1, len, term, acc1);

  mlen = minor_of(bax, cay, bay, cax, minor);
  len = expansion_scale(mlen, minor, u.z(), term);
  const int total = expansion_sum(partial, acc1, len, term, acc2);
  return static_cast<Sign>(expansion_sign(total, acc2));
}

}  // namespace

Sign orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  double detsum;
  if (detleft > 0.0) {
    if (detright <= 0.0) return sign_of(det);
    detsum = detleft + detright;
  } else if (detleft < 0.0) {
    if (detright >= 0.0) return sign_of(det);
    detsum = -detleft - detright;
  } else {
    return sign_of(det);
  }
  const double errbound = kCcwErrBoundA * detsum;
  if (det >= errbound || -det >= errbound) return sign_of(det);
  return orient2d_exact(a, b, c);
}

Sign orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y(), adz = a.z() - d.z();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y(), bdz = b.z() - d.z();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y(), cdz = c.z() - d.z();

  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;

  const double det = adz * (bdxcdy - cdxbdy) + bdz * (cdxady - adxcdy) + cdz * (adxbdy - bdxady);
  const double permanent = (std::fabs(bdxcdy) + std::fabs(cdxbdy)) * std::fabs(adz) +
                           (std::fabs(cdxady) + std::fabs(adxcdy)) * std::fabs(bdz) +
                           (std::fabs(adxbdy) + std::fabs(bdxady)) * std::fabs(cdz);
  const double errbound = kO3dErrBoundA * permanent;
  if (det > errbound || -det > errbound) return sign_of(det);
  return orient3d_exact(a, b, c, d);
}

Sign orient_along(const Vec3& u, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double bax = b.x() - a.x(), bay = b.y() - a.y(), baz = b.z() - a.z();
  const double cax = c.x() - a.x(), cay = c.y() - a.y(), caz = c.z() - a.z();

  const double m1p = bay * caz, m1n = baz * cay;
  const double m2p = baz * cax, m2n = bax * caz;
  const double m3p = bax * cay, m3n = bay * cax;

  const double det = u.x() * (m1p - m1n) + u.y() * (m2p - m2n) + u.z() * (m3p - m3n);
  const double permanent = (std::fabs(m1p) + std::fabs(m1n)) * std::fabs(u.x()) +
                           (std::fabs(m2p) + std::fabs(m2n)) * std::fabs(u.y()) +
                           (std::fabs(m3p) + std::fabs(m3n)) * std::fabs(u.z());
  const double errbound = kO3dErrBoundA * permanent;
  if (det > errbound || -det > errbound) return sign_of(det);
  return orient_along_exact(u, a, b, c);
}

Sign orient3d_eye(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& eye) {
  if (!eye.infinite) return orient3d(a, b, c, eye.v);
  // d -> t*u as t -> inf: det(a-d, b-d, c-d) ~ -t * u.((b-a) x (c-a)).
  return flip(orient_along(eye.v, a, b, c));
}

Sign front_side(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return flip(orient3d(a, b, c, d));
}

Sign front_side(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& eye) {
  return flip(orient3d_eye(a, b, c, eye));
}

bool same_side(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  const Sign sd = orient3d(a, b, c, d);
  const Sign se = orient3d(a, b, c, e);
  if (sd == Sign::Zero || se == Sign::Zero) throw ZeroOrientation{};
  return sd == se;
}

bool same_side(const Vec3& a, const Vec3& b, const Vec3& c, const Eye& d, const Vec3& e) {
  const Sign sd = orient3d_eye(a, b, c, d);
  const Sign se = orient3d(a, b, c, e);
  if (sd == Sign::Zero || se == Sign::Zero) throw ZeroOrientation{};
  return sd == se;
}

std::optional<Crossing2d> segments_intersect_2d(const Vec2& a, const Vec2& b, const Vec2& d,
                                                const Vec2& e) {
  if (a == d || a == e || b == d || b == e) throw SharedEndpoint{};

  const Sign s1 = orient2d(a, b, d);
  const Sign s2 = orient2d(a, b, e);
  if (s1 == s2 || s1 == Sign::Zero || s2 == Sign::Zero) return std::nullopt;
  const Sign s3 = orient2d(d, e, a);
  const Sign s4 = orient2d(d, e, b);
  if (s3 == s4 || s3 == Sign::Zero || s4 == Sign::Zero) return std::nullopt;

  const Vec2 r = b - a;
  const Vec2 q = e - d;
  const Vec2 w = d - a;
  const double denom = r.x() * q.y() - r.y() * q.x();
  Crossing2d cr;
  cr.s = (w.x() * q.y() - w.y() * q.x()) / denom;
  cr.t = (w.x() * r.y() - w.y() * r.x()) / denom;
  cr.point = a + cr.s * r;
  return cr;
}

bool edge_occluded_by_face(const Vec3& p, const Vec3& e, const Vec3& q, const Vec3& r,
                           const Eye& eye) {
  // (1) eye and e on opposite sides of pqr.
  if (same_side(p, q, r, eye, e)) return false;
  // (2) e and r on the same side of the plane (eye, p, q); the side function
  // for x is orient3d(eye, p, q, x) = -orient3d(x, p, q, eye).
  const Sign e_pq = orient3d_eye(e, p, q, eye);
  const Sign r_pq = orient3d_eye(r, p, q, eye);
  if (e_pq == Sign::Zero || r_pq == Sign::Zero) throw ZeroOrientation{};
  if (e_pq != r_pq) return false;
  // (3) e and q on the same side of the plane (eye, p, r).
  const Sign e_pr = orient3d_eye(e, p, r, eye);
  const Sign q_pr = orient3d_eye(q, p, r, eye);
  if (e_pr == Sign::Zero || q_pr == Sign::Zero) throw ZeroOrientation{};
  return e_pr == q_pr;
}

}  // namespace contourline
