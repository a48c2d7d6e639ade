#pragma once

// Isotropic 3-space kernel: top view, the eps-interpolated inner product,
// metric duality with respect to the unit isotropic sphere 2z = x^2 + y^2,
// and planar lines.

#include <cmath>
#include <optional>
#include <variant>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "isoweb/error.hpp"

namespace isoweb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

/// Orthogonal projection onto z = 0.
template <typename Derived>
Vector2<typename Derived::Scalar> top_view(const Eigen::MatrixBase<Derived>& p) {
  return p.template head<2>();
}

/// <p, q>_eps = p.x q.x + p.y q.y + eps p.z q.z
template <typename D1, typename D2>
typename D1::Scalar iso_inner(const Eigen::MatrixBase<D1>& p, const Eigen::MatrixBase<D2>& q,
                              typename D1::Scalar eps) {
  return p(0) * q(0) + p(1) * q(1) + eps * p(2) * q(2);
}

/// Isotropic semi-norm sqrt(x^2 + y^2).
template <typename Derived>
typename Derived::Scalar iso_norm(const Eigen::MatrixBase<Derived>& p) {
  return std::hypot(p(0), p(1));
}

/// Non-isotropic plane z = A x + B y + C.
template <typename Scalar>
struct PlaneT {
  Scalar A{0}, B{0}, C{0};

  Scalar height(Scalar x, Scalar y) const { return A * x + B * y + C; }
  /// Signed vertical offset of p above the plane.
  Scalar vertical_offset(const Vector3<Scalar>& p) const { return p(2) - height(p(0), p(1)); }
};
using Plane = PlaneT<double>;

/// Line a x + b y = c in the plane z = 0 (or the isotropic plane above it).
struct Line2 {
  double a = 0, b = 0, c = 0;

  static Line2 from_slope(double k, double intercept) { return {k, -1.0, -intercept}; }
  static Line2 vertical(double x) { return {1.0, 0.0, x}; }
  static Line2 through(const Vec2& p, const Vec2& q) {
    const Vec2 d = q - p;
    return {-d.y(), d.x(), -d.y() * p.x() + d.x() * p.y()};
  }

  Vec2 normal() const { return {a, b}; }
  /// Signed distance (positive on the side of the normal).
  double signed_distance(const Vec2& p) const { return (a * p.x() + b * p.y() - c) / std::hypot(a, b); }
  bool is_vertical() const { return b == 0.0; }
};

/// Intersection point of two lines, empty if parallel within rel_tol.
std::optional<Vec2> intersect(const Line2& l1, const Line2& l2, double rel_tol = 1e-14);

/// Plane parallel to the z-axis through the line of its top view.
struct IsotropicPlane {
  Line2 trace;
};

using AnyPlane = std::variant<Plane, IsotropicPlane>;

/// Metric dual of a non-isotropic plane: z = A x + B y + C maps to (A, B, -C).
template <typename Scalar>
Vector3<Scalar> dual_of_plane(const PlaneT<Scalar>& pl) {
  return {pl.A, pl.B, -pl.C};
}

inline Vec3 dual_of_plane(const AnyPlane& pl) {
  if (const auto* p = std::get_if<Plane>(&pl)) return dual_of_plane(*p);
  throw Error(ErrorCode::NoDualPoint, "isotropic planes have no metric dual point");
}

/// Metric dual of a point (x*, y*, z*): the plane z + z* = x x* + y y*.
template <typename Derived>
PlaneT<typename Derived::Scalar> dual_of_point(const Eigen::MatrixBase<Derived>& p) {
  return {p(0), p(1), -p(2)};
}

/// Isotropic congruence x' = M x + b with M = [[cos, -sin, 0], [sin, cos, 0], [c1, c2, 1]].
struct IsotropicCongruence {
  double phi = 0, c1 = 0, c2 = 0;
  Vec3 shift = Vec3::Zero();

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d m;
    m << std::cos(phi), -std::sin(phi), 0, std::sin(phi), std::cos(phi), 0, c1, c2, 1;
    return m;
  }
  Vec3 operator()(const Vec3& p) const { return matrix() * p + shift; }
};

/// Signed area of the planar polygon via the shoelace sum.
template <typename Range>
double shoelace_area(const Range& pts) {
  double s = 0;
  const auto n = static_cast<std::ptrdiff_t>(std::size(pts));
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const Vec2& p = pts[k];
    const Vec2& q = pts[(k + 1) % n];
    s += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * s;
}

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace isoweb
