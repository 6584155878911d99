#pragma once

// Multi-component floating-point expansions: each value is a sum of
// non-overlapping doubles sorted by increasing magnitude. Sums and products
// of doubles are closed under this representation, which makes the sign of
// a polynomial in double inputs computable without error.

#include <cassert>
#include <cmath>

namespace contourline::detail {

inline void two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  const double bv = x - a;
  const double av = x - bv;
  y = (a - av) + (b - bv);
}

// Requires |a| >= |b| or a == 0.
inline void fast_two_sum(double a, double b, double& x, double& y) {
  x = a + b;
  y = b - (x - a);
}

inline void two_diff(double a, double b, double& x, double& y) {
  x = a - b;
  const double bv = a - x;
  const double av = x + bv;
  y = (a - av) - (b - bv);
}

inline void two_product(double a, double b, double& x, double& y) {
  x = a * b;
  y = std::fma(a, b, -x);
}

// h = e + f, zero components eliminated. h may not alias e or f.
inline int expansion_sum(int elen, const double* e, int flen, const double* f, double* h) {
  double q, qnew, hh;
  int eindex = 0, findex = 0, hindex = 0;
  double enow = e[0];
  double fnow = f[0];
  if ((fnow > enow) == (fnow > -enow)) {
    q = enow;
    ++eindex;
    enow = eindex < elen ? e[eindex] : 0.0;
  } else {
    q = fnow;
    ++findex;
    fnow = findex < flen ? f[findex] : 0.0;
  }
  if ((eindex < elen) && (findex < flen)) {
    if ((fnow > enow) == (fnow > -enow)) {
      fast_two_sum(enow, q, qnew, hh);
      ++eindex;
      enow = eindex < elen ? e[eindex] : 0.0;
    } else {
      fast_two_sum(fnow, q, qnew, hh);
      ++findex;
      fnow = findex < flen ? f[findex] : 0.0;
    }
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
    while ((eindex < elen) && (findex < flen)) {
      if ((fnow > enow) == (fnow > -enow)) {
        two_sum(q, enow, qnew, hh);
        ++eindex;
        enow = eindex < elen ? e[eindex] : 0.0;
      } else {
        two_sum(q, fnow, qnew, hh);
        ++findex;
        fnow = findex < flen ? f[findex] : 0.0;
      }
      q = qnew;
      if (hh != 0.0) h[hindex++] = hh;
    }
  }
  while (eindex < elen) {
    two_sum(q, enow, qnew, hh);
    ++eindex;
    enow = eindex < elen ? e[eindex] : 0.0;
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  while (findex < flen) {
    two_sum(q, fnow, qnew, hh);
    ++findex;
    fnow = findex < flen ? f[findex] : 0.0;
    q = qnew;
    if (hh != 0.0) h[hindex++] = hh;
  }
  if ((q != 0.0) || (hindex == 0)) h[hindex++] = q;
  return hindex;
}

// h = e * b, zero components eliminated. h may not alias e.
inline int expansion_scale(int elen, const double* e, double b, double* h) {
  double q, sum, hh, product1, product0;
  int hindex = 0;
  two_product(e[0], b, q, hh);
  if (hh != 0.0) h[hindex++] = hh;
  for (int eindex = 1; eindex < elen; eindex++) {
    two_product(e[eindex], b, product1, product0);
    two_sum(q, product0, sum, hh);
    if (hh != 0.0) h[hindex++] = hh;
    fast_two_sum(product1, sum, q, hh);
    if (hh != 0.0) h[hindex++] = hh;
  }
  if ((q != 0.0) || (hindex == 0)) h[hindex++] = q;
  return hindex;
}

// h = e * f by scaling e with each component of f. `scratch` must hold at
// least 2*elen + cap doubles; h must hold cap doubles where cap >= 2*elen*flen.
inline int expansion_mul(int elen, const double* e, int flen, const double* f, double* h,
                         double* scratch, [[maybe_unused]] int cap) {
  assert(elen >= 1 && flen >= 1);
  double* term = scratch;            // 2*elen
  double* acc = scratch + 2 * elen;  // cap
  int hlen = expansion_scale(elen, e, f[0], h);
  for (int j = 1; j < flen; j++) {
    const int tlen = expansion_scale(elen, e, f[j], term);
    for (int i = 0; i < hlen; i++) acc[i] = h[i];
    hlen = expansion_sum(hlen, acc, tlen, term, h);
    assert(hlen <= cap);
  }
  return hlen;
}

inline int expansion_negate(int elen, double* e) {
  for (int i = 0; i < elen; i++) e[i] = -e[i];
  return elen;
}

// The most significant component carries the sign.
inline int expansion_sign(int elen, const double* e) {
  const double m = e[elen - 1];
  if (m > 0.0) return 1;
  if (m < 0.0) return -1;
  return 0;
}

}  // namespace contourline::detail
