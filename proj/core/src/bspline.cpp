#include "contourline/bspline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "contourline/errors.hpp"

namespace contourline {

namespace {

// Cox-de Boor for one parameter: the four nonzero cubic basis values and the
// index of the first influenced control point. Knots are padded uniform.
void cubic_basis(const std::vector<double>& knots, double t, int degree, int& first,
                 double out[4]) {
  const int n_knots = static_cast<int>(knots.size());
  // locate span: knots[span] <= t < knots[span+1]
  int span = degree;
  const int hi_span = n_knots - degree - 2;
  while (span < hi_span && t >= knots[span + 1]) span++;

  double left[4], right[4];
  out[0] = 1.0;
  for (int j = 1; j <= degree; j++) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; r++) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? out[r] / denom : 0.0;
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  first = span - degree;
}

// Equality-constrained least squares via KKT; A is (m x k), C is (c x k).
Eigen::MatrixX2d solve_constrained(const Eigen::MatrixXd& A, const Eigen::MatrixX2d& b,
                                   const Eigen::MatrixXd& C, const Eigen::MatrixX2d& d) {
  const int k = static_cast<int>(A.cols());
  const int c = static_cast<int>(C.rows());
  if (c == 0) {
    return A.colPivHouseholderQr().solve(b);
  }
  Eigen::MatrixXd kkt(k + c, k + c);
  kkt.setZero();
  kkt.topLeftCorner(k, k) = 2.0 * A.transpose() * A;
  kkt.topRightCorner(k, c) = C.transpose();
  kkt.bottomLeftCorner(c, k) = C;
  Eigen::MatrixX2d rhs(k + c, 2);
  rhs.topRows(k) = 2.0 * A.transpose() * b;
  rhs.bottomRows(c) = d;
  const Eigen::MatrixX2d sol = kkt.colPivHouseholderQr().solve(rhs);
  return sol.topRows(k);
}

}  // namespace

std::vector<double> chord_length_params(std::span<const Vec2> points) {
  std::vector<double> t(points.size(), 0.0);
  double total = 0;
  for (std::size_t i = 1; i < points.size(); i++) {
    total += (points[i] - points[i - 1]).norm();
    t[i] = total;
  }
  if (total > 0)
    for (auto& v : t) v /= total;
  return t;
}

CubicBSpline2 CubicBSpline2::fit_open(std::span<const Vec2> points,
                                      std::span<const double> params, int num_controls,
                                      bool lock_ends,
                                      std::span<const std::pair<double, Vec2>> constraints) {
  const int degree = 3;
  const int m = static_cast<int>(points.size());
  num_controls = std::clamp(num_controls, degree + 1, std::max(degree + 1, m));
  const int k = num_controls;

  CubicBSpline2 spline;
  spline.periodic_ = false;
  spline.knots_.assign(k + degree + 1, 0.0);
  for (int i = 0; i <= degree; i++) {
    spline.knots_[i] = 0.0;
    spline.knots_[k + i] = 1.0;
  }
  for (int i = 1; i < k - degree; i++)
    spline.knots_[degree + i] = static_cast<double>(i) / (k - degree);

  Eigen::MatrixXd A(m, k);
  A.setZero();
  Eigen::MatrixX2d b(m, 2);
  for (int i = 0; i < m; i++) {
    int first;
    double w[4];
    cubic_basis(spline.knots_, params[i], degree, first, w);
    for (int j = 0; j < 4; j++)
      if (first + j >= 0 && first + j < k) A(i, first + j) += w[j];
    b(i, 0) = points[i].x();
    b(i, 1) = points[i].y();
  }

  std::vector<std::pair<double, Vec2>> cons(constraints.begin(), constraints.end());
  if (lock_ends) {
    cons.insert(cons.begin(), {0.0, points.front()});
    cons.push_back({1.0, points.back()});
  }
  Eigen::MatrixXd C(cons.size(), k);
  C.setZero();
  Eigen::MatrixX2d d(cons.size(), 2);
  for (std::size_t i = 0; i < cons.size(); i++) {
    int first;
    double w[4];
    cubic_basis(spline.knots_, cons[i].first, degree, first, w);
    for (int j = 0; j < 4; j++)
      if (first + j >= 0 && first + j < k) C(i, first + j) += w[j];
    d(i, 0) = cons[i].second.x();
    d(i, 1) = cons[i].second.y();
  }

  const Eigen::MatrixX2d sol = solve_constrained(A, b, C, d);
  spline.controls_.resize(k);
  for (int i = 0; i < k; i++) spline.controls_[i] = Vec2(sol(i, 0), sol(i, 1));
  return spline;
}

CubicBSpline2 CubicBSpline2::fit_periodic(std::span<const Vec2> points,
                                          std::span<const double> params, int num_controls,
                                          std::span<const std::pair<double, Vec2>> constraints) {
  const int degree = 3;
  const int m = static_cast<int>(points.size());
  num_controls = std::clamp(num_controls, degree + 1, std::max(degree + 1, m));
  const int k = num_controls;

  CubicBSpline2 spline;
  spline.periodic_ = true;
  // uniform knots over [0,1] with wrap-around; basis evaluated on the lifted
  // knot vector, control indices folded mod k
  const int total = k + 2 * degree + 1;
  spline.knots_.resize(total);
  for (int i = 0; i < total; i++)
    spline.knots_[i] = static_cast<double>(i - degree) / k;

  Eigen::MatrixXd A(m, k);
  A.setZero();
  Eigen::MatrixX2d b(m, 2);
  for (int i = 0; i < m; i++) {
    int first;
    double w[4];
    cubic_basis(spline.knots_, params[i], degree, first, w);
    for (int j = 0; j < 4; j++) A(i, ((first + j) % k + k) % k) += w[j];
    b(i, 0) = points[i].x();
    b(i, 1) = points[i].y();
  }
  Eigen::MatrixXd C(constraints.size(), k);
  C.setZero();
  Eigen::MatrixX2d d(constraints.size(), 2);
  for (std::size_t i = 0; i < constraints.size(); i++) {
    int first;
    double w[4];
    cubic_basis(spline.knots_, constraints[i].first, degree, first, w);
    for (int j = 0; j < 4; j++) C(i, ((first + j) % k + k) % k) += w[j];
    d(i, 0) = constraints[i].second.x();
    d(i, 1) = constraints[i].second.y();
  }

  const Eigen::MatrixX2d sol = solve_constrained(A, b, C, d);
  spline.controls_.resize(k);
  for (int i = 0; i < k; i++) spline.controls_[i] = Vec2(sol(i, 0), sol(i, 1));
  return spline;
}

void CubicBSpline2::basis_row(double t, int& first, double out[4]) const {
  cubic_basis(knots_, t, 3, first, out);
}

Vec2 CubicBSpline2::evaluate(double t) const {
  const int k = static_cast<int>(controls_.size());
  if (periodic_) {
    t -= std::floor(t);
  } else {
    t = std::clamp(t, 0.0, 1.0);
  }
  int first;
  double w[4];
  basis_row(t, first, w);
  Vec2 out = Vec2::Zero();
  for (int j = 0; j < 4; j++) {
    const int idx = periodic_ ? ((first + j) % k + k) % k : std::clamp(first + j, 0, k - 1);
    out += w[j] * controls_[idx];
  }
  return out;
}

std::vector<Vec2> CubicBSpline2::sample(int count) const {
  count = std::max(count, 2);
  std::vector<Vec2> out(count);
  const int denom = periodic_ ? count : count - 1;
  for (int i = 0; i < count; i++) out[i] = evaluate(static_cast<double>(i) / denom);
  return out;
}

}  // namespace contourline
