#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "isoweb/isotropic.hpp"

namespace isoweb {

enum class LineRole { None, Geodesic, Asymptotic };

enum class WebKind { Generic, GGG, AAG, AGAG, CRPC };

std::string_view to_string(LineRole r);
std::string_view to_string(WebKind k);
LineRole line_role_from_string(std::string_view s);
WebKind web_kind_from_string(std::string_view s);

enum class Family { ILines, JLines, DiagMinus, DiagPlus };

struct NetRoles {
  LineRole i_lines = LineRole::None;
  LineRole j_lines = LineRole::None;
  LineRole diag_minus = LineRole::None;  // i - j = const
  LineRole diag_plus = LineRole::None;   // i + j = const

  LineRole of(Family f) const;
  static NetRoles for_kind(WebKind k);
  bool operator==(const NetRoles&) const = default;
};

/// Regular (rows x cols) grid of vertices f_ij, row-major. An "i-line" is the
/// polyline with fixed i, so it runs along j.
class Net {
 public:
  Net() = default;
  Net(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  int index(int i, int j) const { return i * cols_ + j; }
  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < rows_ && j < cols_; }
  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == rows_ - 1 || j == cols_ - 1; }

  Eigen::Ref<Vec3> operator()(int i, int j) { return pts_.col(index(i, j)); }
  Vec3 operator()(int i, int j) const { return pts_.col(index(i, j)); }
  Vec2 xy(int i, int j) const { return pts_.col(index(i, j)).head<2>(); }

  Eigen::Matrix3Xd& points() { return pts_; }
  const Eigen::Matrix3Xd& points() const { return pts_; }

  NetRoles roles;
  WebKind kind = WebKind::Generic;
  std::string boundary_policy = "include-boundary-stars";

  /// Throws InvalidInput on duplicate vertices or non-finite coordinates.
  void validate(double rel_tol = 1e-14) const;
  /// Throws InconsistentRoles if roles do not match kind.
  void check_roles() const;
  double mean_edge_length() const;

 private:
  int rows_ = 0, cols_ = 0;
  Eigen::Matrix3Xd pts_;
};

struct VertexRef {
  int i = 0, j = 0;
  bool operator==(const VertexRef&) const = default;
};

struct Polyline {
  std::vector<VertexRef> verts;
  std::vector<bool> interior;  // per vertex, false at curve ends and net boundary

  int size() const { return static_cast<int>(verts.size()); }
};

/// All polylines of a family with at least two vertices, in index order.
std::vector<Polyline> family_polylines(const Net& net, Family f);
Polyline i_line(const Net& net, int i);
Polyline j_line(const Net& net, int j);

// --- geometric kernel ---

struct FacePlaneFit {
  AnyPlane plane;
  double max_distance = 0;  // orthogonal distance of corners to the fitted plane
};

/// Least-squares (orthogonal) plane through the corners of face (i, j), i.e.
/// f_ij, f_{i+1,j}, f_{i+1,j+1}, f_{i,j+1}. Never throws on non-planarity.
FacePlaneFit fit_face_plane(const Net& net, int i, int j);

/// Throws NonPlanarFace when a corner is farther than rel_tol * mean edge
/// length from the fitted plane, IsotropicFace for vertical planes.
Plane face_plane(const Net& net, int i, int j, double rel_tol = 1e-8);

/// Top views of the duals of p_{i-1,j-1}, p_{i,j-1}, p_{ij}, p_{i-1,j}.
std::array<Vec2, 4> dual_face_top_view(const Net& net, int i, int j, double rel_tol = 1e-8);

/// Discrete isotropic Gaussian curvature at an interior vertex.
double curvature_omega(const Net& net, int i, int j, double rel_tol = 1e-8);

enum class EdgeDir { PlusI, PlusJ, MinusI, MinusJ };

struct OppositeRatio {
  double value = 0;
  bool degenerate = false;  // dual lines parallel, fallback length ratio returned
};

OppositeRatio opposite_ratio(const std::array<Vec2, 4>& duals, EdgeDir e);
OppositeRatio opposite_ratio(const Net& net, int i, int j, EdgeDir e, double rel_tol = 1e-8);

Vec3 discrete_binormal(const Vec3& prev, const Vec3& cur, const Vec3& next);
Vec3 discrete_normal(const Net& net, int i, int j);

/// Normalized distance of a point set to its best-fit plane.
double star_planarity(const std::vector<Vec3>& pts);

enum class Stencil { Parameter, DiagonalEven, DiagonalOdd };

/// Neighbors of (i,j) in the stencil that exist in the net.
std::vector<VertexRef> stencil_neighbors(const Net& net, int i, int j, Stencil s);
bool stencil_center(const Net& net, int i, int j, Stencil s);  // parity match
bool stencil_interior(const Net& net, int i, int j, Stencil s);

/// Max over interior stars of the best-fit plane distance over the mean star
/// edge length.
double anet_residual(const Net& net, Stencil s = Stencil::Parameter);

double geodesic_residual(const Net& net, const Polyline& poly, double eps);

double face_central_angle(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3);
double face_central_angle(const Net& net, int i, int j);

struct Report {
  int num_vertices = 0;
  int rows = 0, cols = 0;
  std::map<std::string, double> geodesic_eps0;  // per family
  std::map<std::string, double> geodesic_eps1;
  double anet_parameter = 0, anet_even = 0, anet_odd = 0;
  double planarity = 0;  // max face corner distance over mean edge length
  double angle_min = 0, angle_max = 0, angle_mean = 0;  // degrees
  std::vector<double> omega_bin_edges;
  std::vector<int> omega_histogram;
};

Report diagnostics_report(const Net& net);

}  // namespace isoweb
