#include "isoweb/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace isoweb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NoDualPoint: return "NoDualPoint";
    case ErrorCode::NonPlanarFace: return "NonPlanarFace";
    case ErrorCode::IsotropicFace: return "IsotropicFace";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::CollinearPoints: return "CollinearPoints";
    case ErrorCode::DegenerateTangents: return "DegenerateTangents";
    case ErrorCode::DegenerateVertex: return "DegenerateVertex";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::DegenerateParameters: return "DegenerateParameters";
    case ErrorCode::SingularStep: return "SingularStep";
    case ErrorCode::SeedOffLine: return "SeedOffLine";
    case ErrorCode::ZeroMultiplier: return "ZeroMultiplier";
    case ErrorCode::ZeroPivot: return "ZeroPivot";
    case ErrorCode::ParallelTangents: return "ParallelTangents";
    case ErrorCode::InconsistentLift: return "InconsistentLift";
    case ErrorCode::EllipticPoint: return "EllipticPoint";
    case ErrorCode::FlatPoint: return "FlatPoint";
    case ErrorCode::CrossedFlatPoint: return "CrossedFlatPoint";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::StepFailed: return "StepFailed";
    case ErrorCode::InconsistentRoles: return "InconsistentRoles";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::StallDetected: return "StallDetected";
    case ErrorCode::ContinuationFailed: return "ContinuationFailed";
    case ErrorCode::ZeroEdge: return "ZeroEdge";
    case ErrorCode::NoFootPoint: return "NoFootPoint";
    case ErrorCode::BadTopology: return "BadTopology";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

std::optional<Vec2> intersect(const Line2& l1, const Line2& l2, double rel_tol) {
  const double det = l1.a * l2.b - l1.b * l2.a;
  const double scale = std::hypot(l1.a, l1.b) * std::hypot(l2.a, l2.b);
  if (std::abs(det) <= rel_tol * scale) return std::nullopt;
  return Vec2((l1.c * l2.b - l1.b * l2.c) / det, (l1.a * l2.c - l1.c * l2.a) / det);
}

std::string_view to_string(LineRole r) {
  switch (r) {
    case LineRole::None: return "none";
    case LineRole::Geodesic: return "geodesic";
    case LineRole::Asymptotic: return "asymptotic";
  }
  return "none";
}

std::string_view to_string(WebKind k) {
  switch (k) {
    case WebKind::Generic: return "generic";
    case WebKind::GGG: return "GGG";
    case WebKind::AAG: return "AAG";
    case WebKind::AGAG: return "AGAG";
    case WebKind::CRPC: return "CRPC";
  }
  return "generic";
}

LineRole line_role_from_string(std::string_view s) {
  if (s == "geodesic") return LineRole::Geodesic;
  if (s == "asymptotic") return LineRole::Asymptotic;
  if (s == "none" || s.empty()) return LineRole::None;
  throw Error(ErrorCode::InvalidInput, "unknown line role '" + std::string(s) + "'");
}

WebKind web_kind_from_string(std::string_view s) {
  if (s == "GGG") return WebKind::GGG;
  if (s == "AAG") return WebKind::AAG;
  if (s == "AGAG") return WebKind::AGAG;
  if (s == "CRPC") return WebKind::CRPC;
  if (s == "generic") return WebKind::Generic;
  throw Error(ErrorCode::InconsistentRoles, "unknown web kind '" + std::string(s) + "'");
}

LineRole NetRoles::of(Family f) const {
  switch (f) {
    case Family::ILines: return i_lines;
    case Family::JLines: return j_lines;
    case Family::DiagMinus: return diag_minus;
    case Family::DiagPlus: return diag_plus;
  }
  return LineRole::None;
}

NetRoles NetRoles::for_kind(WebKind k) {
  using R = LineRole;
  switch (k) {
    case WebKind::GGG: return {R::Geodesic, R::Geodesic, R::Geodesic, R::None};
    case WebKind::AAG: return {R::Asymptotic, R::Asymptotic, R::Geodesic, R::None};
    case WebKind::AGAG: return {R::Geodesic, R::Geodesic, R::Asymptotic, R::Asymptotic};
    case WebKind::CRPC: return {R::Asymptotic, R::Asymptotic, R::None, R::None};
    case WebKind::Generic: break;
  }
  return {};
}

Net::Net(int rows, int cols) : rows_(rows), cols_(cols), pts_(Eigen::Matrix3Xd::Zero(3, rows * cols)) {
  if (rows < 1 || cols < 1) throw Error(ErrorCode::InvalidInput, "net needs at least one vertex");
}

void Net::validate(double rel_tol) const {
  if (!pts_.allFinite()) throw Error(ErrorCode::InvalidInput, "non-finite vertex coordinates");
  const double tol = rel_tol * std::max(1.0, pts_.cwiseAbs().maxCoeff());
  std::vector<int> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int k = 0; k < 3; ++k)
      if (pts_(k, a) != pts_(k, b)) return pts_(k, a) < pts_(k, b);
    return a < b;
  });
  for (size_t k = 1; k < order.size(); ++k) {
    if ((pts_.col(order[k]) - pts_.col(order[k - 1])).cwiseAbs().maxCoeff() <= tol) {
      const int a = order[k - 1], b = order[k];
      throw Error(ErrorCode::InvalidInput, "duplicate vertices (" + std::to_string(a / cols_) + "," +
                                               std::to_string(a % cols_) + ") and (" + std::to_string(b / cols_) +
                                               "," + std::to_string(b % cols_) + ")");
    }
  }
}

void Net::check_roles() const {
  if (kind == WebKind::Generic) return;
  if (!(roles == NetRoles::for_kind(kind)))
    throw Error(ErrorCode::InconsistentRoles, "role tags do not match web kind " + std::string(to_string(kind)));
}

double Net::mean_edge_length() const {
  double sum = 0;
  int count = 0;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      if (i + 1 < rows_) sum += (pts_.col(index(i + 1, j)) - pts_.col(index(i, j))).norm(), ++count;
      if (j + 1 < cols_) sum += (pts_.col(index(i, j + 1)) - pts_.col(index(i, j))).norm(), ++count;
    }
  return count ? sum / count : 0.0;
}

// --- polylines ---

namespace {

Polyline make_polyline(const Net& net, std::vector<VertexRef> verts) {
  Polyline p;
  p.verts = std::move(verts);
  p.interior.resize(p.verts.size());
  for (size_t k = 0; k < p.verts.size(); ++k) {
    const bool end = k == 0 || k + 1 == p.verts.size();
    p.interior[k] = !end && !net.is_boundary(p.verts[k].i, p.verts[k].j);
  }
  return p;
}

}  // namespace

Polyline i_line(const Net& net, int i) {
  std::vector<VertexRef> v;
  for (int j = 0; j < net.cols(); ++j) v.push_back({i, j});
  return make_polyline(net, std::move(v));
}

Polyline j_line(const Net& net, int j) {
  std::vector<VertexRef> v;
  for (int i = 0; i < net.rows(); ++i) v.push_back({i, j});
  return make_polyline(net, std::move(v));
}

std::vector<Polyline> family_polylines(const Net& net, Family f) {
  std::vector<Polyline> out;
  const int m = net.rows(), n = net.cols();
  switch (f) {
    case Family::ILines:
      if (n >= 2)
        for (int i = 0; i < m; ++i) out.push_back(i_line(net, i));
      break;
    case Family::JLines:
      if (m >= 2)
        for (int j = 0; j < n; ++j) out.push_back(j_line(net, j));
      break;
    case Family::DiagMinus:
      for (int d = -(n - 1); d <= m - 1; ++d) {
        std::vector<VertexRef> v;
        for (int i = std::max(0, d); i <= std::min(m - 1, d + n - 1); ++i) v.push_back({i, i - d});
        if (v.size() >= 2) out.push_back(make_polyline(net, std::move(v)));
      }
      break;
    case Family::DiagPlus:
      for (int s = 0; s <= m + n - 2; ++s) {
        std::vector<VertexRef> v;
        for (int i = std::max(0, s - n + 1); i <= std::min(m - 1, s); ++i) v.push_back({i, s - i});
        if (v.size() >= 2) out.push_back(make_polyline(net, std::move(v)));
      }
      break;
  }
  return out;
}

// --- faces and duality ---

FacePlaneFit fit_face_plane(const Net& net, int i, int j) {
  if (!net.contains(i, j) || !net.contains(i + 1, j + 1))
    throw Error(ErrorCode::InvalidInput, "face index out of range");
  const std::array<Vec3, 4> c{net(i, j), net(i + 1, j), net(i + 1, j + 1), net(i, j + 1)};
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : c) centroid += p / 4.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : c) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Vec3 nrm = es.eigenvectors().col(0);
  FacePlaneFit fit;
  for (const auto& p : c) fit.max_distance = std::max(fit.max_distance, std::abs(nrm.dot(p - centroid)));
  if (std::abs(nrm.z()) < 1e-12) {
    fit.plane = IsotropicPlane{Line2{nrm.x(), nrm.y(), nrm.head<2>().dot(centroid.head<2>())}};
  } else {
    fit.plane = Plane{-nrm.x() / nrm.z(), -nrm.y() / nrm.z(), nrm.dot(centroid) / nrm.z()};
  }
  return fit;
}

namespace {

double face_mean_edge(const Net& net, int i, int j) {
  return 0.25 * ((net(i + 1, j) - net(i, j)).norm() + (net(i + 1, j + 1) - net(i + 1, j)).norm() +
                 (net(i, j + 1) - net(i + 1, j + 1)).norm() + (net(i, j) - net(i, j + 1)).norm());
}

}  // namespace

Plane face_plane(const Net& net, int i, int j, double rel_tol) {
  const FacePlaneFit fit = fit_face_plane(net, i, j);
  if (std::isfinite(rel_tol) && fit.max_distance > rel_tol * face_mean_edge(net, i, j))
    throw Error(ErrorCode::NonPlanarFace, "face (" + std::to_string(i) + "," + std::to_string(j) +
                                              ") deviates by " + std::to_string(fit.max_distance));
  if (const auto* p = std::get_if<Plane>(&fit.plane)) return *p;
  throw Error(ErrorCode::IsotropicFace, "face (" + std::to_string(i) + "," + std::to_string(j) + ") is vertical");
}

std::array<Vec2, 4> dual_face_top_view(const Net& net, int i, int j, double rel_tol) {
  if (i <= 0 || j <= 0 || i >= net.rows() - 1 || j >= net.cols() - 1)
    throw Error(ErrorCode::InvalidInput, "vertex is on the boundary");
  const std::array<std::pair<int, int>, 4> faces{{{i - 1, j - 1}, {i, j - 1}, {i, j}, {i - 1, j}}};
  std::array<Vec2, 4> d;
  for (int k = 0; k < 4; ++k) d[k] = top_view(dual_of_plane(face_plane(net, faces[k].first, faces[k].second, rel_tol)));
  return d;
}

double curvature_omega(const Net& net, int i, int j, double rel_tol) {
  return shoelace_area(dual_face_top_view(net, i, j, rel_tol));
}

OppositeRatio opposite_ratio(const std::array<Vec2, 4>& d, EdgeDir e) {
  // Faces around the vertex in counterclockwise order are p_{i-1,j-1},
  // p_{i,j-1}, p_ij, p_{i-1,j}; the edge -j separates the first two.
  int a = 0;
  switch (e) {
    case EdgeDir::MinusJ: a = 0; break;
    case EdgeDir::PlusI: a = 1; break;
    case EdgeDir::PlusJ: a = 2; break;
    case EdgeDir::MinusI: a = 3; break;
  }
  const Vec2 p1 = d[a], p2 = d[(a + 1) % 4], p3 = d[(a + 2) % 4], p4 = d[(a + 3) % 4];
  double scale = 0;
  for (int s = 0; s < 4; ++s)
    for (int t = s + 1; t < 4; ++t) scale = std::max(scale, (d[s] - d[t]).norm());
  const Vec2 u = p2 - p1, v = p3 - p4;
  if (scale == 0 || u.norm() <= 1e-12 * scale || v.norm() <= 1e-12 * scale)
    throw Error(ErrorCode::ZeroDenominator, "dual points coincide, opposite ratio undefined");
  if (std::abs(cross2(u, v)) <= 1e-12 * u.norm() * v.norm()) return {u.norm() / v.norm(), true};
  // p* is dual to the plane through the edge and its opposite edge.
  const Vec2 ps = *intersect(Line2::through(p1, p2), Line2::through(p4, p3), 0.0);
  const double num = cross2(p1 - ps, p4 - ps);
  const double den = cross2(p2 - ps, p3 - ps);
  if (std::abs(den) <= 1e-14 * scale * scale) throw Error(ErrorCode::ZeroDenominator, "second dual triangle degenerate");
  return {num / den, false};
}

OppositeRatio opposite_ratio(const Net& net, int i, int j, EdgeDir e, double rel_tol) {
  return opposite_ratio(dual_face_top_view(net, i, j, rel_tol), e);
}

Vec3 discrete_binormal(const Vec3& prev, const Vec3& cur, const Vec3& next) {
  const Vec3 a = cur - prev, b = cur - next;
  const Vec3 c = a.cross(b);
  if (c.norm() <= 1e-14 * a.norm() * b.norm() || a.norm() == 0 || b.norm() == 0)
    throw Error(ErrorCode::CollinearPoints, "binormal of collinear points");
  return c.normalized();
}

Vec3 discrete_normal(const Net& net, int i, int j) {
  if (net.rows() < 2 || net.cols() < 2) throw Error(ErrorCode::DegenerateTangents, "net has no tangent pair");
  const Vec3 ei = i + 1 < net.rows() ? Vec3(net(i + 1, j) - net(i, j)) : Vec3(net(i, j) - net(i - 1, j));
  const Vec3 ej = j + 1 < net.cols() ? Vec3(net(i, j + 1) - net(i, j)) : Vec3(net(i, j) - net(i, j - 1));
  const Vec3 c = ei.cross(ej);
  if (c.norm() <= 1e-14 * ei.norm() * ej.norm() || c.norm() == 0)
    throw Error(ErrorCode::DegenerateTangents,
                "tangents at (" + std::to_string(i) + "," + std::to_string(j) + ") are parallel");
  return c.normalized();
}

double star_planarity(const std::vector<Vec3>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Vec3 nrm = es.eigenvectors().col(0);
  double dist = 0;
  for (const auto& p : pts) dist = std::max(dist, std::abs(nrm.dot(p - centroid)));
  return dist;
}

std::vector<VertexRef> stencil_neighbors(const Net& net, int i, int j, Stencil s) {
  static constexpr int param[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  static constexpr int diag[4][2] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const auto& off = s == Stencil::Parameter ? param : diag;
  std::vector<VertexRef> out;
  for (const auto& o : off)
    if (net.contains(i + o[0], j + o[1])) out.push_back({i + o[0], j + o[1]});
  return out;
}

bool stencil_center(const Net&, int i, int j, Stencil s) {
  switch (s) {
    case Stencil::Parameter: return true;
    case Stencil::DiagonalEven: return ((i + j) & 1) == 0;
    case Stencil::DiagonalOdd: return ((i + j) & 1) == 1;
  }
  return false;
}

bool stencil_interior(const Net& net, int i, int j, Stencil s) {
  return stencil_center(net, i, j, s) && i > 0 && j > 0 && i < net.rows() - 1 && j < net.cols() - 1;
}

double anet_residual(const Net& net, Stencil s) {
  double worst = 0;
  for (int i = 1; i + 1 < net.rows(); ++i)
    for (int j = 1; j + 1 < net.cols(); ++j) {
      if (!stencil_interior(net, i, j, s)) continue;
      std::vector<Vec3> pts{net(i, j)};
      double edge = 0;
      for (const auto& v : stencil_neighbors(net, i, j, s)) {
        pts.push_back(net(v.i, v.j));
        edge += (net(v.i, v.j) - net(i, j)).norm() / 4.0;
      }
      if (edge > 0) worst = std::max(worst, star_planarity(pts) / edge);
    }
  return worst;
}

double geodesic_residual(const Net& net, const Polyline& poly, double eps) {
  double worst = 0;
  for (int k = 1; k + 1 < poly.size(); ++k) {
    const Vec3 a = net(poly.verts[k - 1].i, poly.verts[k - 1].j);
    const Vec3 b = net(poly.verts[k].i, poly.verts[k].j);
    const Vec3 c = net(poly.verts[k + 1].i, poly.verts[k + 1].j);
    if (eps == 0.0) {
      const Vec2 u = top_view(b - a), v = top_view(c - b);
      if (u.norm() == 0 || v.norm() == 0) throw Error(ErrorCode::DegenerateVertex, "repeated top view on polyline");
      worst = std::max(worst, std::atan2(std::abs(cross2(u, v)), u.dot(v)));
      continue;
    }
    Vec3 bn;
    try {
      bn = discrete_binormal(a, b, c);
    } catch (const Error&) {
      continue;  // straight: osculating plane undefined, residual 0
    }
    Vec3 n;
    try {
      n = discrete_normal(net, poly.verts[k].i, poly.verts[k].j);
    } catch (const Error& e) {
      throw Error(ErrorCode::DegenerateVertex, e.what());
    }
    const double nb = std::sqrt(iso_inner(bn, bn, eps)), nn = std::sqrt(iso_inner(n, n, eps));
    if (nb < 1e-12 || nn < 1e-12) continue;
    worst = std::max(worst, std::abs(iso_inner(bn, n, eps)) / (nb * nn));
  }
  return worst;
}

double face_central_angle(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  const Vec3 fa = 0.5 * (p0 + p1), fb = 0.5 * (p1 + p2), fc = 0.5 * (p2 + p3), fd = 0.5 * (p3 + p0);
  const Vec3 u = fc - fa, v = fd - fb;
  const double scale = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p3 - p2).norm(), (p0 - p3).norm()});
  if (u.norm() <= 1e-14 * scale || v.norm() <= 1e-14 * scale || scale == 0)
    throw Error(ErrorCode::DegenerateFace, "central line of zero length");
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

double face_central_angle(const Net& net, int i, int j) {
  return face_central_angle(net(i, j), net(i + 1, j), net(i + 1, j + 1), net(i, j + 1));
}

Report diagnostics_report(const Net& net) {
  Report r;
  r.rows = net.rows();
  r.cols = net.cols();
  r.num_vertices = net.size();
  const std::array<std::pair<Family, const char*>, 4> fams{
      {{Family::ILines, "iLines"}, {Family::JLines, "jLines"}, {Family::DiagMinus, "diagMinus"}, {Family::DiagPlus, "diagPlus"}}};
  for (const auto& [f, name] : fams) {
    double g0 = 0, g1 = 0;
    for (const auto& p : family_polylines(net, f)) {
      if (p.size() < 3) continue;
      try {
        g0 = std::max(g0, geodesic_residual(net, p, 0.0));
      } catch (const Error&) {
        g0 = std::numeric_limits<double>::quiet_NaN();
      }
      try {
        g1 = std::max(g1, geodesic_residual(net, p, 1.0));
      } catch (const Error&) {
        g1 = std::numeric_limits<double>::quiet_NaN();
      }
    }
    r.geodesic_eps0[name] = g0;
    r.geodesic_eps1[name] = g1;
  }
  r.anet_parameter = anet_residual(net, Stencil::Parameter);
  r.anet_even = anet_residual(net, Stencil::DiagonalEven);
  r.anet_odd = anet_residual(net, Stencil::DiagonalOdd);

  double amin = 1e300, amax = -1e300, asum = 0;
  int acount = 0;
  for (int i = 0; i + 1 < net.rows(); ++i)
    for (int j = 0; j + 1 < net.cols(); ++j) {
      const double e = face_mean_edge(net, i, j);
      if (e > 0) r.planarity = std::max(r.planarity, fit_face_plane(net, i, j).max_distance / e);
      try {
        const double a = face_central_angle(net, i, j) * 180.0 / M_PI;
        amin = std::min(amin, a), amax = std::max(amax, a), asum += a, ++acount;
      } catch (const Error&) {
      }
    }
  if (acount) r.angle_min = amin, r.angle_max = amax, r.angle_mean = asum / acount;

  std::vector<double> omegas;
  for (int i = 1; i + 1 < net.rows(); ++i)
    for (int j = 1; j + 1 < net.cols(); ++j) {
      try {
        omegas.push_back(curvature_omega(net, i, j, std::numeric_limits<double>::infinity()));
      } catch (const Error&) {
      }
    }
  if (!omegas.empty()) {
    constexpr int bins = 10;
    const auto [lo, hi] = std::minmax_element(omegas.begin(), omegas.end());
    const double a = *lo, b = *hi > *lo ? *hi : *lo + 1.0;
    r.omega_histogram.assign(bins, 0);
    for (int k = 0; k <= bins; ++k) r.omega_bin_edges.push_back(a + (b - a) * k / bins);
    for (double w : omegas) r.omega_histogram[std::min(bins - 1, static_cast<int>((w - a) / (b - a) * bins))]++;
  }
  return r;
}

}  // namespace isoweb
