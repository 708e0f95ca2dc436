#pragma once

// Reference implementations used only by tests. They follow textbook
// definitions and share no code with the library's evaluation paths.

#include "gaitlib/bezier.hpp"
#include "gaitlib/gait_model.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using gaitlib::Matrix;
using gaitlib::Vector;

// Recursive de Casteljau evaluation of one control polygon.
inline Vector de_casteljau(Matrix points, double tau) {
  for (Eigen::Index level = points.cols() - 1; level > 0; --level) {
    for (Eigen::Index j = 0; j < level; ++j) {
      points.col(j) = (1.0 - tau) * points.col(j) + tau * points.col(j + 1);
    }
  }
  return points.col(0);
}

// de Casteljau subdivision: the left polygon collects the first point of
// every level, the right polygon the last one.
inline std::pair<Matrix, Matrix> de_casteljau_split(const Matrix& coeffs, double s) {
  const Eigen::Index n = coeffs.cols();
  Matrix work = coeffs;
  Matrix left(coeffs.rows(), n), right(coeffs.rows(), n);
  left.col(0) = work.col(0);
  right.col(n - 1) = work.col(n - 1);
  for (Eigen::Index level = 1; level < n; ++level) {
    for (Eigen::Index j = 0; j < n - level; ++j) work.col(j) = (1.0 - s) * work.col(j) + s * work.col(j + 1);
    left.col(level) = work.col(0);
    right.col(n - 1 - level) = work.col(n - 1 - level);
  }
  return {left, right};
}

// Direct Bernstein sum with std::pow and a factorial-based binomial.
inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline Vector bernstein_sum(const Matrix& coeffs, double tau) {
  const int b = static_cast<int>(coeffs.cols()) - 1;
  Vector out = Vector::Zero(coeffs.rows());
  for (int j = 0; j <= b; ++j) out += coeffs.col(j) * binomial(b, j) * std::pow(tau, j) * std::pow(1.0 - tau, b - j);
  return out;
}

inline Vector central_difference(const gaitlib::BezierCurve& c, double tau, double h) {
  return (c.eval(tau + h) - c.eval(tau - h)) / (2.0 * h);
}

inline Matrix random_coeffs(std::mt19937_64& rng, Eigen::Index rows, int degree, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Matrix::NullaryExpr(rows, degree + 1, [&] { return u(rng); });
}

// Circumcircle test evaluated around the circumcentre instead of the
// determinant: true when d is strictly inside the circle through a, b, c.
inline bool inside_circumcircle(gaitlib::Velocity a, gaitlib::Velocity b, gaitlib::Velocity c, gaitlib::Velocity d,
                                double rel_tol) {
  const double ax = a.x, ay = a.y, bx = b.x, by = b.y, cx = c.x, cy = c.y;
  const double den = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
  const double ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / den;
  const double uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / den;
  const double r = std::hypot(ax - ux, ay - uy);
  return std::hypot(d.x - ux, d.y - uy) < r * (1.0 - rel_tol);
}

// Every triangle's circumcircle is empty of the other points.
inline bool is_delaunay(const gaitlib::GaitLibrary& lib, double rel_tol = 1e-9) {
  for (const auto& t : lib.triangles()) {
    for (int i = 0; i < lib.size(); ++i) {
      if (i == t[0] || i == t[1] || i == t[2]) continue;
      if (inside_circumcircle(lib.gait(t[0]).velocity, lib.gait(t[1]).velocity, lib.gait(t[2]).velocity,
                              lib.gait(i).velocity, rel_tol)) {
        return false;
      }
    }
  }
  return true;
}

// Barycentric coordinates by solving the 2x2 system directly.
inline std::array<double, 3> barycentric(gaitlib::Velocity a, gaitlib::Velocity b, gaitlib::Velocity c,
                                         gaitlib::Velocity p) {
  Eigen::Matrix2d m;
  m << b.x - a.x, c.x - a.x, b.y - a.y, c.y - a.y;
  const Eigen::Vector2d rhs(p.x - a.x, p.y - a.y);
  const Eigen::Vector2d w = m.fullPivLu().solve(rhs);
  return {1.0 - w(0) - w(1), w(0), w(1)};
}

inline double triangle_area(gaitlib::Velocity a, gaitlib::Velocity b, gaitlib::Velocity c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

}  // namespace oracle
