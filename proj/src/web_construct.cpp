#include "isoweb/web_construct.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace isoweb {

namespace {

std::string ij(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

double line_distance(const Line2& l, const Vec2& p) { return std::abs(l.signed_distance(p)); }

void require_on_line(const Line2& l, const Vec2& p, const std::string& what) {
  if (line_distance(l, p) > 1e-12 * std::max(1.0, p.norm()))
    throw Error(ErrorCode::SeedOffLine, what + " is off its line by " + std::to_string(line_distance(l, p)));
}

bool is_arithmetic(const std::vector<double>& v, double step) {
  for (size_t k = 1; k < v.size(); ++k)
    if (std::abs(v[k] - v[k - 1] - step) > 1e-12 * std::max(1.0, std::abs(step))) return false;
  return true;
}

}  // namespace

// --- line webs ---

LineWeb pencil_line_web(int n, double h) {
  if (n < 0 || !(h > 0)) throw Error(ErrorCode::InvalidInput, "pencil web needs n >= 0 and h > 0");
  LineWeb web;
  web.rows = web.cols = n + 1;
  for (int i = 0; i <= n; ++i) web.i_lines.lines.push_back(Line2::vertical(i * h));
  for (int j = 0; j <= n; ++j) web.j_lines.lines.push_back({0.0, 1.0, j * h});
  for (int k = 0; k <= 2 * n; ++k) web.diagonals.lines.push_back({1.0, 1.0, k * h});
  web.rule = DiagonalRule::Sum;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) web.vertices.emplace_back(i * h, j * h);
  return web;
}

LineWeb cubic_tangent_web(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.empty() || v.empty()) throw Error(ErrorCode::InvalidInput, "empty parameter list");
  auto tangent = [](double s) { return Line2{3 * s, -s * s * s, 2.0}; };
  LineWeb web;
  web.rows = static_cast<int>(u.size());
  web.cols = static_cast<int>(v.size());
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) {
      const double a = u[i], b = v[j], den = a * b * (a + b);
      if (std::abs(den) < 1e-14 || std::abs(a + b) < 1e-12 * (std::abs(a) + std::abs(b)))
        throw Error(ErrorCode::DegenerateParameters, "u=" + std::to_string(a) + ", v=" + std::to_string(b));
      web.vertices.emplace_back(2 * (a * a + a * b + b * b) / (3 * den), 2 / den);
    }
  for (double s : u) web.i_lines.lines.push_back(tangent(s));
  for (double s : v) web.j_lines.lines.push_back(tangent(s));
  const double hu = u.size() > 1 ? u[1] - u[0] : (v.size() > 1 ? v[1] - v[0] : 1.0);
  const double hv = v.size() > 1 ? v[1] - v[0] : hu;
  if (is_arithmetic(u, hu) && is_arithmetic(v, hv) && std::abs(hu - hv) <= 1e-12 * std::abs(hu)) {
    web.rule = DiagonalRule::Sum;
    for (int k = 0; k <= web.rows + web.cols - 2; ++k) web.diagonals.lines.push_back(tangent(-(u[0] + v[0] + k * hu)));
  }
  return web;
}

Net lift_to_graph(const LineWeb& web, const std::function<double(double, double)>& phi) {
  Net net(web.rows, web.cols);
  const bool flip = web.has_diagonals() && web.rule == DiagonalRule::Sum;
  for (int i = 0; i < web.rows; ++i)
    for (int j = 0; j < web.cols; ++j) {
      const Vec2 p = web.vertex(i, flip ? web.cols - 1 - j : j);
      net(i, j) = Vec3(p.x(), p.y(), phi(p.x(), p.y()));
    }
  if (web.has_diagonals()) {
    net.kind = WebKind::GGG;
    net.roles = NetRoles::for_kind(WebKind::GGG);
  } else {
    net.roles.i_lines = net.roles.j_lines = LineRole::Geodesic;
  }
  return net;
}

// --- Algorithm 1 ---

Net aag_propagate(const AagSeed& seed, double singular_tol) {
  const int n = seed.n();
  if (n < 1) throw Error(ErrorCode::InvalidInput, "AAG seed needs at least two diagonal points");
  if (static_cast<int>(seed.lines.size()) != 2 * n + 1 || static_cast<int>(seed.subdiagonal.size()) != n + 2)
    throw Error(ErrorCode::InvalidInput, "AAG seed needs 2n+1 lines and n+2 subdiagonal points");
  for (int k = 0; k <= n; ++k) require_on_line(seed.lines[n], top_view(seed.diagonal[k]), "f" + ij(k, k));
  for (int k = 0; k <= n + 1; ++k) require_on_line(seed.lines[n + 1], top_view(seed.subdiagonal[k]), "f" + ij(k, k - 1));

  Net net(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) net(k, k) = seed.diagonal[k];
  for (int k = 1; k <= n; ++k) net(k, k - 1) = seed.subdiagonal[k];
  // point accessor covering the two auxiliary points f_{0,-1} and f_{n+1,n}
  auto F = [&](int i, int j) -> Vec3 {
    if (j == i - 1) return seed.subdiagonal[i];
    return net(i, j);
  };
  const int w = n + 3;
  std::vector<Vec3> normals(static_cast<size_t>(w * w), Vec3::Zero());
  auto N = [&](int i, int j) -> Vec3& { return normals[(i + 1) * w + (j + 1)]; };

  auto solve = [&](const Vec3& n1, const Vec3& p1, const Vec3& n2, const Vec3& p2, const Line2& line, int i, int l) {
    Eigen::Matrix3d A;
    Vec3 rhs;
    A.row(0) = n1.transpose();
    rhs(0) = n1.dot(p1);
    A.row(1) = n2.transpose();
    rhs(1) = n2.dot(p2);
    A.row(2) = Vec3(line.a, line.b, 0).transpose();
    rhs(2) = line.c;
    for (int r = 0; r < 3; ++r) {
      const double s = A.row(r).norm();
      if (s == 0) throw Error(ErrorCode::SingularStep, "zero normal at step i=" + std::to_string(i) + ", l=" + std::to_string(l));
      A.row(r) /= s;
      rhs(r) /= s;
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(2) < singular_tol * svd.singularValues()(0))
      throw Error(ErrorCode::SingularStep, "rank-deficient system at i=" + std::to_string(i) + ", l=" + std::to_string(l));
    return Vec3(svd.solve(rhs));
  };

  // "+" run: vertices f_{i,i+l} on D_{n-l}
  for (int l = 0; l <= n; ++l)
    for (int i = 0; i + l <= n; ++i) {
      const int j = i + l;
      if (l >= 1) net(i, j) = solve(N(i, j - 1), F(i, j - 1), N(i + 1, j), F(i + 1, j), seed.lines[n - l], i, l);
      N(i, j) = (F(i, j) - F(i, j - 1)).cross(F(i, j) - F(i + 1, j));
    }
  // "-" run: vertices f_{i,i-l} on D_{n+l}
  for (int l = 1; l <= n; ++l)
    for (int i = l; i <= n; ++i) {
      const int j = i - l;
      if (l >= 2) net(i, j) = solve(N(i, j + 1), F(i, j + 1), N(i - 1, j), F(i - 1, j), seed.lines[n + l], i, -l);
      N(i, j) = (F(i, j) - F(i, j + 1)).cross(F(i, j) - F(i - 1, j));
    }
  net.kind = WebKind::AAG;
  net.roles = NetRoles::for_kind(WebKind::AAG);
  return net;
}

// --- Algorithm 2 ---

namespace {

double ratio(const Vec2& u, const Vec2& v) {
  const double vv = v.squaredNorm();
  if (vv == 0) throw Error(ErrorCode::SingularStep, "multiplier ratio with zero denominator");
  return u.dot(v) / vv;
}

Vec2 meet(const Line2& d, const Vec2& p, const Vec2& q, const std::string& what) {
  const auto x = intersect(d, Line2::through(p, q), 1e-12);
  if (!x) throw Error(ErrorCode::SingularStep, "diagonal parallel to its line at " + what);
  return *x;
}

}  // namespace

KoenigsData koenigs_propagate(const KoenigsSeed& seed, double singular_tol) {
  const int n = seed.n();
  if (n < 1) throw Error(ErrorCode::InvalidInput, "Koenigs seed needs n >= 1");
  if (static_cast<int>(seed.lines.size()) != 2 * n + 1 || static_cast<int>(seed.boundary.size()) != 2 * n + 1 ||
      static_cast<int>(seed.superdiagonal.size()) != n - 1)
    throw Error(ErrorCode::InvalidInput, "Koenigs seed sizes do not match n");
  if (seed.nu00 == 0 || seed.nu01 == 0) throw Error(ErrorCode::ZeroMultiplier, "seed multipliers must be nonzero");

  KoenigsData out;
  out.net = Net(n + 1, n + 1);
  Net& net = out.net;
  auto set = [&](int i, int j, const Vec2& p) {
    require_on_line(seed.lines[n + i - j], p, "f" + ij(i, j));
    net(i, j) = Vec3(p.x(), p.y(), 0);
  };
  for (int k = 0; k <= n; ++k) set(0, n - k, seed.boundary[k]);
  for (int k = n + 1; k <= 2 * n; ++k) set(k - n, 0, seed.boundary[k]);
  for (int i = 1; i <= n; ++i) set(i, i, seed.diagonal[i - 1]);
  for (int i = 1; i < n; ++i) set(i, i + 1, seed.superdiagonal[i - 1]);

  Eigen::MatrixXd& nu = out.nu;
  nu = Eigen::MatrixXd::Constant(n + 1, n + 1, std::numeric_limits<double>::quiet_NaN());
  nu(0, 0) = seed.nu00;
  nu(0, 1) = seed.nu01;
  out.m.assign(static_cast<size_t>(n * n), Vec2::Zero());
  auto M = [&](int i, int j) -> Vec2& { return out.m[i * n + j]; };
  auto f = [&](int i, int j) { return net.xy(i, j); };
  auto check_nu = [&](int i, int j) {
    if (!std::isfinite(nu(i, j)) || std::abs(nu(i, j)) < 1e-14)
      throw Error(ErrorCode::ZeroMultiplier, "multiplier at " + ij(i, j) + " vanished");
  };

  // Unknowns f, m on line d, mu: F = Mp + mu/nuP (P - Mp) and nuG (F - m) = mu (G - m).
  auto solve_triple = [&](const Vec2& Mp, const Vec2& P, double nuP, const Vec2& G, double nuG, const Line2& d,
                          const std::string& where, Vec2& F, Vec2& m, double& mu) {
    const Vec2 a(d.a, d.b);
    const double den = a.dot(G) - nuG / nuP * a.dot(P - Mp) - d.c;
    const double scale = a.norm() * std::max({G.norm(), P.norm(), Mp.norm(), 1.0});
    if (std::abs(den) < singular_tol * scale) throw Error(ErrorCode::SingularStep, "singular system at " + where);
    mu = nuG * (a.dot(Mp) - d.c) / den;
    if (std::abs(mu - nuG) < singular_tol * std::abs(nuG))
      throw Error(ErrorCode::SingularStep, "diagonal point at infinity at " + where);
    F = Mp + mu / nuP * (P - Mp);
    m = (mu * G - nuG * F) / (mu - nuG);
  };

  for (int s = 0; s < n; ++s) {
    M(s, 0) = meet(seed.lines[n + s], f(s + 1, 0), f(s, 1), "m" + ij(s, 0));
    M(0, s) = meet(seed.lines[n - s], f(0, s + 1), f(1, s), "m" + ij(0, s));
    nu(s + 1, 0) = nu(s, 1) * ratio(f(s + 1, 0) - M(s, 0), f(s, 1) - M(s, 0));
    check_nu(s + 1, 0);
    if (s > 0) {
      nu(0, s + 1) = nu(1, s) * ratio(f(0, s + 1) - M(0, s), f(1, s) - M(0, s));
      check_nu(0, s + 1);
    }
    for (int i = 1; i <= s; ++i) {
      if (i < s) {
        Vec2 F, m;
        double mu;
        solve_triple(M(i - 1, s), f(i - 1, s), nu(i - 1, s), f(i + 1, s), nu(i + 1, s), seed.lines[n + i - s],
                     "f" + ij(i, s + 1), F, m, mu);
        net(i, s + 1) = Vec3(F.x(), F.y(), 0);
        M(i, s) = m;
        nu(i, s + 1) = mu;
      } else {
        nu(i, s + 1) = nu(i - 1, s) * ratio(f(i, s + 1) - M(i - 1, s), f(i - 1, s) - M(i - 1, s));
      }
      check_nu(i, s + 1);
      Vec2 F, m;
      double mu;
      solve_triple(M(s, i - 1), f(s, i - 1), nu(s, i - 1), f(s, i + 1), nu(s, i + 1), seed.lines[n + s - i],
                   "f" + ij(s + 1, i), F, m, mu);
      net(s + 1, i) = Vec3(F.x(), F.y(), 0);
      M(s, i) = m;
      nu(s + 1, i) = mu;
      check_nu(s + 1, i);
    }
    if (s == 0) M(0, 0) = meet(seed.lines[n], f(1, 0), f(0, 1), "m(0,0)");
    nu(s + 1, s + 1) = nu(s, s) * ratio(f(s + 1, s + 1) - M(s, s), f(s, s) - M(s, s));
    check_nu(s + 1, s + 1);
  }
  net.roles.diag_minus = LineRole::Geodesic;
  return out;
}

double koenigs_residual(const Net& planar, const Eigen::MatrixXd& nu) {
  double worst = 0;
  auto rel = [](const Vec2& a, const Vec2& b) {
    const double s = std::max(a.norm(), b.norm());
    return s > 0 ? (a - b).norm() / s : 0.0;
  };
  for (int i = 0; i + 1 < planar.rows(); ++i)
    for (int j = 0; j + 1 < planar.cols(); ++j) {
      const Vec2 a = planar.xy(i, j), b = planar.xy(i + 1, j), c = planar.xy(i + 1, j + 1), d = planar.xy(i, j + 1);
      const auto m = intersect(Line2::through(a, c), Line2::through(d, b), 1e-14);
      if (!m) return std::numeric_limits<double>::infinity();
      worst = std::max(worst, rel((a - *m) / nu(i, j), (c - *m) / nu(i + 1, j + 1)));
      worst = std::max(worst, rel((d - *m) / nu(i, j + 1), (b - *m) / nu(i + 1, j)));
    }
  return worst;
}

// --- lifts ---

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct StarRow {
  std::array<int, 4> vars;
  std::array<double, 4> coef;
};

std::vector<StarRow> star_rows(const Net& top, const std::vector<Stencil>& stencils) {
  std::vector<StarRow> rows;
  for (Stencil s : stencils)
    for (int i = 0; i < top.rows(); ++i)
      for (int j = 0; j < top.cols(); ++j) {
        if (!stencil_center(top, i, j, s)) continue;
        const auto nb = stencil_neighbors(top, i, j, s);
        if (nb.size() < 3) continue;
        const int subsets = nb.size() == 4 ? 4 : 1;
        for (int skip = 0; skip < subsets; ++skip) {
          std::array<VertexRef, 3> q;
          for (int k = 0, t = 0; k < static_cast<int>(nb.size()); ++k)
            if (nb.size() == 3 || k != skip) q[t++] = nb[k];
          std::array<Vec2, 3> r;
          double scale = 0;
          for (int k = 0; k < 3; ++k) {
            r[k] = top.xy(q[k].i, q[k].j) - top.xy(i, j);
            scale = std::max(scale, r[k].squaredNorm());
          }
          // det of the difference rows, expanded along the z column
          const double c1 = cross2(r[1], r[2]), c2 = -cross2(r[0], r[2]), c3 = cross2(r[0], r[1]);
          StarRow row{{top.index(q[0].i, q[0].j), top.index(q[1].i, q[1].j), top.index(q[2].i, q[2].j), top.index(i, j)},
                      {c1, c2, c3, -(c1 + c2 + c3)}};
          double norm = 0;
          for (double c : row.coef) norm += c * c;
          norm = std::sqrt(norm);
          if (norm <= 1e-14 * scale) continue;
          for (double& c : row.coef) c /= norm;
          rows.push_back(row);
        }
      }
  return rows;
}

/// Factorized elimination system for a fixed anchor vertex set.
class LiftSystem {
 public:
  LiftSystem(const Net& top, const std::vector<Stencil>& stencils, const std::vector<int>& anchor_vertices,
             double pivot_tol)
      : top_(top), rows_(star_rows(top, stencils)), slot_(top.size(), -1) {
    std::vector<bool> anchored(top.size(), false);
    for (int v : anchor_vertices) anchored[v] = true;
    for (int v = 0; v < top.size(); ++v)
      if (!anchored[v]) slot_[v] = nfree_++;
    std::vector<Eigen::Triplet<double>> trip;
    for (size_t r = 0; r < rows_.size(); ++r)
      for (int k = 0; k < 4; ++k)
        if (slot_[rows_[r].vars[k]] >= 0) trip.emplace_back(static_cast<int>(r), slot_[rows_[r].vars[k]], rows_[r].coef[k]);
    A_.resize(static_cast<int>(rows_.size()), nfree_);
    A_.setFromTriplets(trip.begin(), trip.end());
    if (nfree_ == 0) return;
    SpMat normal = SpMat(A_.transpose()) * A_;
    ldlt_.compute(normal);
    const Eigen::VectorXd D = ldlt_.vectorD();
    const double dmax = D.size() ? D.maxCoeff() : 0.0;
    for (int k = 0; k < D.size(); ++k) {
      if (ldlt_.info() != Eigen::Success || !(D(k) > pivot_tol * dmax)) {
        const int col = ldlt_.permutationPinv().indices()(k);
        int v = 0;
        while (slot_[v] != col) ++v;
        throw Error(ErrorCode::ZeroPivot, "heights not determined at vertex " + ij(v / top.cols(), v % top.cols()));
      }
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& anchor_z) const {
    // anchor_z holds a value for every vertex; only anchored entries are read
    Eigen::VectorXd z = anchor_z;
    if (nfree_ == 0) return z;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<int>(rows_.size()));
    for (size_t r = 0; r < rows_.size(); ++r)
      for (int k = 0; k < 4; ++k)
        if (slot_[rows_[r].vars[k]] < 0) rhs(r) -= rows_[r].coef[k] * anchor_z(rows_[r].vars[k]);
    const Eigen::VectorXd zf = ldlt_.solve(A_.transpose() * rhs);
    for (int v = 0; v < top_.size(); ++v)
      if (slot_[v] >= 0) z(v) = zf(slot_[v]);
    return z;
  }

  double residual(const Eigen::VectorXd& z) const {
    double worst = 0;
    for (const auto& row : rows_) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += row.coef[k] * z(row.vars[k]);
      worst = std::max(worst, std::abs(s));
    }
    return worst / std::max(1.0, z.cwiseAbs().maxCoeff());
  }

 private:
  const Net& top_;
  std::vector<StarRow> rows_;
  std::vector<int> slot_;
  int nfree_ = 0;
  SpMat A_;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

bool is_affine(const Net& net) {
  Eigen::MatrixXd A(net.size(), 3);
  Eigen::VectorXd z(net.size());
  for (int k = 0; k < net.size(); ++k) {
    A.row(k) << 1.0, net.points()(0, k), net.points()(1, k);
    z(k) = net.points()(2, k);
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(z);
  return (A * c - z).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, z.cwiseAbs().maxCoeff());
}

Net with_heights(const Net& top, const Eigen::VectorXd& z) {
  Net out = top;
  out.points().row(2) = z.transpose();
  return out;
}

}  // namespace

LiftResult solve_lift(const Net& topviews, const std::vector<HeightAnchor>& anchors, const std::vector<Stencil>& stencils,
                      double pivot_tol) {
  std::vector<int> verts;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(topviews.size());
  for (const auto& a : anchors) {
    if (!topviews.contains(a.i, a.j)) throw Error(ErrorCode::InvalidInput, "anchor outside the net " + ij(a.i, a.j));
    verts.push_back(topviews.index(a.i, a.j));
    z(verts.back()) = a.z;
  }
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const LiftSystem sys(topviews, stencils, verts, pivot_tol);
  z = sys.solve(z);
  LiftResult res;
  res.net = with_heights(topviews, z);
  res.residual = sys.residual(z);
  res.trivial = is_affine(res.net);
  return res;
}

Net anet_lift(const Net& topviews, const std::vector<HeightAnchor>& anchors) {
  Net net = solve_lift(topviews, anchors, {Stencil::Parameter}).net;
  net.roles.i_lines = net.roles.j_lines = LineRole::Asymptotic;
  return net;
}

std::vector<HeightAnchor> side_anchors(const Net& net) {
  std::vector<HeightAnchor> out;
  for (int j = 0; j < net.cols(); ++j) out.push_back({0, j, net(0, j).z()});
  for (int i = 1; i < net.rows(); ++i) out.push_back({i, 0, net(i, 0).z()});
  return out;
}

std::vector<VertexRef> lift_anchor_vertices(const Net& net, Stencil s) {
  const int m = net.rows() - 1, n = net.cols() - 1;
  std::vector<VertexRef> cand;
  for (const int fi : {0, 4, 2, 1, 3})
    for (const int fj : {0, 4, 2, 1, 3}) {
      VertexRef v{fi * m / 4, fj * n / 4};
      if (!stencil_center(net, v.i, v.j, s)) v.j += (v.j < n ? 1 : -1);
      if (net.contains(v.i, v.j) && std::find(cand.begin(), cand.end(), v) == cand.end()) cand.push_back(v);
    }
  // vertices outside the stencil's parity class are held fixed while probing
  std::vector<int> others;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= n; ++j)
      if (!stencil_center(net, i, j, s)) others.push_back(net.index(i, j));
  const int c = static_cast<int>(cand.size());
  for (int a = 0; a < c; ++a)
    for (int b = a + 1; b < c; ++b)
      for (int d = b + 1; d < c; ++d)
        for (int e = d + 1; e < c; ++e) {
          std::vector<int> verts = others;
          for (int k : {a, b, d, e}) verts.push_back(net.index(cand[k].i, cand[k].j));
          try {
            LiftSystem(net, {s}, verts, 1e-10);
            return {cand[a], cand[b], cand[d], cand[e]};
          } catch (const Error& err) {
            if (err.code() != ErrorCode::ZeroPivot) throw;
          }
        }
  throw Error(ErrorCode::ZeroPivot, "no four vertices pin the lift space");
}

Net fit_lift(const Net& topviews, const std::vector<Stencil>& stencils,
             const std::function<double(double, double)>& target) {
  std::vector<int> verts;
  for (Stencil s : stencils)
    for (const auto& v : lift_anchor_vertices(topviews, s)) verts.push_back(topviews.index(v.i, v.j));
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  const LiftSystem sys(topviews, stencils, verts, 1e-12);
  const int V = topviews.size(), K = static_cast<int>(verts.size());
  Eigen::MatrixXd basis(V, K);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(V);
    e(verts[k]) = 1.0;
    basis.col(k) = sys.solve(e);
  }
  Eigen::VectorXd phi(V);
  for (int v = 0; v < V; ++v) phi(v) = target(topviews.points()(0, v), topviews.points()(1, v));
  const Eigen::VectorXd c = basis.colPivHouseholderQr().solve(phi);
  return with_heights(topviews, basis * c);
}

// --- AGAG ---

GNet tangent_line_gnet(const LineFamily& a, const LineFamily& b) {
  GNet g;
  const int m = static_cast<int>(a.lines.size()), n = static_cast<int>(b.lines.size());
  g.net = Net(m, n);
  g.web.rows = m;
  g.web.cols = n;
  g.web.i_lines = a;
  g.web.j_lines = b;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const auto p = intersect(a.lines[i], b.lines[j], 1e-12);
      if (!p) throw Error(ErrorCode::ParallelTangents, "lines " + ij(i, j) + " do not meet");
      g.net(i, j) = Vec3(p->x(), p->y(), 0);
      g.web.vertices.push_back(*p);
    }
  g.net.kind = WebKind::AGAG;
  g.net.roles = NetRoles::for_kind(WebKind::AGAG);
  return g;
}

GNet conic_tangent_gnet(const std::vector<double>& thetas, const std::vector<double>& phis) {
  LineFamily a, b;
  for (double t : thetas) a.lines.push_back({std::cos(t), std::sin(t), 1.0});
  for (double t : phis) b.lines.push_back({std::cos(t), std::sin(t), 1.0});
  return tangent_line_gnet(a, b);
}

Net build_agag(const Net& gnet, const std::vector<HeightAnchor>& anchors, double tol) {
  LiftResult res = solve_lift(gnet, anchors, {Stencil::DiagonalEven, Stencil::DiagonalOdd});
  if (res.residual > tol)
    throw Error(ErrorCode::InconsistentLift, "joint lift residual " + std::to_string(res.residual));
  res.net.kind = WebKind::AGAG;
  res.net.roles = NetRoles::for_kind(WebKind::AGAG);
  return res.net;
}

Net aag_from_koenigs(const KoenigsData& data, const std::function<double(double, double)>& target) {
  Net net = fit_lift(data.net, {Stencil::Parameter}, target);
  net.kind = WebKind::AAG;
  net.roles = NetRoles::for_kind(WebKind::AAG);
  return net;
}

}  // namespace isoweb
