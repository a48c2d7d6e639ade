#include "isoweb/flexnets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "isoweb/error.hpp"

namespace isoweb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string ij(int i, int j) { return "(" + std::to_string(i) + "," + std::to_string(j) + ")"; }

double det3(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

Plane fitted_plane(const Net& net, int i, int j) { return face_plane(net, i, j, kInf); }

}  // namespace

// --- generalized T-nets ---

void ConeCylinderData::validate() const {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::InvalidInput, "cone-cylinder data needs at least 2 a and 2 b");
  if (sigma.size() != a.size()) throw Error(ErrorCode::InvalidInput, "sigma and a differ in length");
  for (size_t i = 0; i < sigma.size(); ++i)
    if (sigma[i] == 0 || !std::isfinite(sigma[i]))
      throw Error(ErrorCode::InvalidInput, "sigma_" + std::to_string(i) + " must be nonzero");
}

Net cone_cylinder_net(const ConeCylinderData& d) {
  d.validate();
  Net net(static_cast<int>(d.a.size()), static_cast<int>(d.b.size()));
  for (int i = 0; i < net.rows(); ++i)
    for (int j = 0; j < net.cols(); ++j) net(i, j) = d.a[i] + d.sigma[i] * d.b[j];
  return net;
}

Net tnet_from_cone_cylinder(const ConeCylinderData& d) {
  d.validate();
  const Net P = cone_cylinder_net(d);
  Net f(P.rows() - 1, P.cols() - 1);
  const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY(), e3 = Vec3::UnitZ();
  for (int i = 0; i < f.rows(); ++i)
    for (int j = 0; j < f.cols(); ++j) {
      const Vec3 db = d.b[j + 1] - d.b[j];
      const Vec3 delta = d.a[i + 1] - d.a[i] + d.b[j] * (d.sigma[i + 1] - d.sigma[i]);
      const double den = det3(e3, db, delta);
      if (std::abs(den) <= 1e-12 * db.norm() * delta.norm() || den == 0)
        throw Error(ErrorCode::ZeroDenominator, "cone-cylinder face " + ij(i, j) + " is isotropic");
      const Vec3 p = d.a[i] + d.sigma[i] * d.b[j];
      f(i, j) = -Vec3(det3(e1, db, delta), det3(e2, db, delta), det3(p, db, delta)) / den;
    }
  return f;
}

ConeCylinderData random_cone_cylinder(int m, int n, unsigned seed) {
  // a perturbation of the translational net sampling z = (x^2 + y^2)/2, which
  // is self-dual; the T-net then samples the same paraboloid roughly
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  ConeCylinderData d;
  const double hx = 2.0 / (m + 1), hy = 2.0 / (n + 1);
  for (int i = 0; i <= m + 1; ++i) {
    const double x = -1 + i * hx;
    d.a.emplace_back(x + 0.05 * hx * u(gen), 0.05 * hx * u(gen), 0.5 * x * x + 0.05 * hx * u(gen));
    d.sigma.push_back(1 + 0.04 * u(gen));
  }
  for (int j = 0; j <= n + 1; ++j) {
    const double y = -1 + j * hy;
    d.b.emplace_back(0.05 * hy * u(gen), y + 0.05 * hy * u(gen), 0.5 * y * y + 0.05 * hy * u(gen));
  }
  return d;
}

// --- class checks ---

namespace {

struct TopLine {
  Vec2 point, dir;
};

// Top view of p1 cap p2: (A1 - A2) x + (B1 - B2) y = C2 - C1.
std::optional<TopLine> intersection_top_view(const Plane& p1, const Plane& p2, const Vec2& near) {
  const Vec2 nrm(p1.A - p2.A, p1.B - p2.B);
  const double scale = std::max({1.0, std::hypot(p1.A, p1.B), std::hypot(p2.A, p2.B)});
  if (nrm.norm() <= 1e-12 * scale) return std::nullopt;
  const double c = p2.C - p1.C;
  const Vec2 foot = near - nrm * ((nrm.dot(near) - c) / nrm.squaredNorm());
  return TopLine{foot, Vec2(-nrm.y(), nrm.x()).normalized()};
}

Vec2 face_top_centroid(const Net& net, int i, int j) {
  return 0.25 * (net.xy(i, j) + net.xy(i + 1, j) + net.xy(i + 1, j + 1) + net.xy(i, j + 1));
}

ClassIDirection class_i_direction(const Net& net, bool along_i, double tol) {
  ClassIDirection out;
  const int mf = net.rows() - 1, nf = net.cols() - 1;
  const int K = along_i ? mf : nf, L = along_i ? nf : mf;
  if (K < 3) return out;
  double diam = 0;
  Eigen::Vector2d lo = net.points().topRows<2>().rowwise().minCoeff(), hi = net.points().topRows<2>().rowwise().maxCoeff();
  diam = (hi - lo).norm();
  const double mean = net.mean_edge_length();
  bool all_ok = true;
  for (int k = 0; k + 2 < K; ++k) {
    std::vector<Vec2> pts;
    for (int l = 0; l < L; ++l) {
      const int i1 = along_i ? k : l, j1 = along_i ? l : k;
      const int i2 = along_i ? k + 2 : l, j2 = along_i ? l : k + 2;
      const auto line = intersection_top_view(fitted_plane(net, i1, j1), fitted_plane(net, i2, j2),
                                              face_top_centroid(net, along_i ? k + 1 : l, along_i ? l : k + 1));
      if (!line) {
        out.parallel.push_back({k, l});
        continue;
      }
      pts.push_back(line->point + 0.5 * diam * line->dir);
      pts.push_back(line->point - 0.5 * diam * line->dir);
    }
    double dev = 0;
    if (pts.size() >= 4) {
      Vec2 c = Vec2::Zero();
      for (const auto& p : pts) c += p;
      c /= static_cast<double>(pts.size());
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
      const Vec2 nrm = es.eigenvectors().col(0);
      for (const auto& p : pts) dev = std::max(dev, std::abs(nrm.dot(p - c)));
      dev /= mean;
    }
    if (!pts.empty()) out.tested = true;
    out.deviation.push_back(dev);
    if (dev > tol) all_ok = false;
  }
  out.passes = out.tested && all_ok;
  return out;
}

}  // namespace

ClassIReport class_i_check(const Net& net, double tol) {
  if (net.rows() < 4 || net.cols() < 4) throw Error(ErrorCode::InvalidInput, "class (i) check needs a 4x4 net");
  ClassIReport r;
  r.along_i = class_i_direction(net, true, tol);
  r.along_j = class_i_direction(net, false, tol);
  r.passes = r.along_i.passes || r.along_j.passes;
  r.degenerate = !r.along_i.tested && !r.along_j.tested;
  return r;
}

ClassIIReport class_ii_check(const Net& net, double tol) {
  ClassIIReport r;
  const auto interior = [&](int i, int j) { return i >= 1 && j >= 1 && i <= net.rows() - 2 && j <= net.cols() - 2; };
  for (int i = 1; i + 1 < net.rows(); ++i)
    for (int j = 1; j + 1 < net.cols(); ++j)
      for (EdgeDir dir : {EdgeDir::PlusI, EdgeDir::PlusJ}) {
        const int i2 = dir == EdgeDir::PlusI ? i + 1 : i, j2 = dir == EdgeDir::PlusJ ? j + 1 : j;
        if (!interior(i2, j2)) continue;
        const auto a = opposite_ratio(net, i, j, dir, kInf);
        // seen from the far end the faces beside the edge swap roles, so the
        // ratio for the same oriented edge is the reciprocal
        const auto b = opposite_ratio(net, i2, j2, dir == EdgeDir::PlusI ? EdgeDir::MinusI : EdgeDir::MinusJ, kInf);
        if (b.value == 0) throw Error(ErrorCode::ZeroDenominator, "opposite ratio vanishes at " + ij(i2, j2));
        const double rb = 1.0 / b.value;
        r.edges.push_back({i, j, dir, a.value, rb, a.degenerate || b.degenerate});
        r.max_mismatch = std::max(r.max_mismatch, std::abs(a.value - rb));
      }
  r.passes = !r.edges.empty() && r.max_mismatch <= tol;
  return r;
}

namespace {

// Planarity by the normalized volume of the corner tetrahedron, then opposite
// ratio mismatches.
Eigen::VectorXd class_ii_residuals(const Net& net) {
  std::vector<double> r;
  for (int i = 0; i + 1 < net.rows(); ++i)
    for (int j = 0; j + 1 < net.cols(); ++j) {
      const Vec3 a = net(i + 1, j) - net(i, j), b = net(i + 1, j + 1) - net(i, j), c = net(i, j + 1) - net(i, j);
      const double s = (a.norm() + b.norm() + c.norm()) / 3;
      r.push_back(det3(a, b, c) / (s * s * s));
    }
  for (const auto& e : class_ii_check(net).edges) r.push_back(e.ratio_a - e.ratio_b);
  return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
}

}  // namespace

ClassIIFit optimize_class_ii(const Net& start, int max_iter, double tol) {
  if (start.rows() < 4 || start.cols() < 4) throw Error(ErrorCode::InvalidInput, "class (ii) fit needs a 4x4 net");
  ClassIIFit out{start, 0, 0};
  Net& net = out.net;
  const int n = 3 * net.size();
  const double h = 1e-7 * std::max(1.0, net.mean_edge_length());
  double lambda = 1e-6;
  Eigen::VectorXd r = class_ii_residuals(net);
  for (; out.iterations < max_iter && r.cwiseAbs().maxCoeff() > tol; ++out.iterations) {
    Eigen::MatrixXd J(r.size(), n);
    for (int k = 0; k < n; ++k) {
      Net p = net, m = net;
      p.points().data()[k] += h;
      m.points().data()[k] -= h;
      J.col(k) = (class_ii_residuals(p) - class_ii_residuals(m)) / (2 * h);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    while (lambda < 1e8) {
      const Eigen::VectorXd delta = (JtJ + lambda * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-g);
      Net trial = net;
      Eigen::Map<Eigen::VectorXd>(trial.points().data(), n) += delta;
      Eigen::VectorXd rt;
      try {
        rt = class_ii_residuals(trial);
      } catch (const Error&) {
        lambda *= 4;
        continue;
      }
      if (rt.squaredNorm() < r.squaredNorm()) {
        net = std::move(trial);
        r = rt;
        lambda = std::max(lambda * 0.5, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 4;
    }
    if (!accepted) break;
  }
  out.residual = r.cwiseAbs().maxCoeff();
  return out;
}

// --- projective maps ---

ZProjectiveMap::ZProjectiveMap(const Eigen::Matrix4d& m) : M(m) {
  const Eigen::Vector4d img = M.col(2);
  const double s = img.norm();
  if (s == 0 || std::abs(img[0]) > 1e-12 * s || std::abs(img[1]) > 1e-12 * s || std::abs(img[3]) > 1e-12 * s)
    throw Error(ErrorCode::InvalidInput, "map does not fix the isotropic direction");
  if (std::abs(M.determinant()) <= 1e-12 * std::pow(M.norm(), 4)) throw Error(ErrorCode::InvalidInput, "singular map");
}

Vec3 ZProjectiveMap::operator()(const Vec3& p) const {
  const Eigen::Vector4d h = M * Eigen::Vector4d(p.x(), p.y(), p.z(), 1.0);
  if (!(h[3] >= 1e-10)) throw Error(ErrorCode::PointAtInfinity, "point maps to the plane at infinity");
  return h.head<3>() / h[3];
}

Net z_projective_transform(const Net& net, const ZProjectiveMap& map) {
  Net out = net;
  for (int i = 0; i < net.rows(); ++i)
    for (int j = 0; j < net.cols(); ++j) {
      try {
        out(i, j) = map(net(i, j));
      } catch (const Error& e) {
        throw Error(ErrorCode::PointAtInfinity, "vertex " + ij(i, j) + " maps to the plane at infinity");
      }
    }
  return out;
}

// --- flexion ---

namespace {

int face_id(const Net& net, int i, int j) { return i * (net.cols() - 1) + j; }

std::array<int, 4> face_corners(const Net& net, int i, int j) {
  return {net.index(i, j), net.index(i + 1, j), net.index(i + 1, j + 1), net.index(i, j + 1)};
}

struct DriverFaces {
  int a, b;     // edge vertices
  int f1, f2;   // (i, j-1), (i, j) for PlusI; (i-1, j), (i, j) for PlusJ
};

DriverFaces driver_faces(const Net& net, const FlexDriver& d) {
  bool ok = false;
  DriverFaces r{};
  if (d.dir == EdgeDir::PlusI) {
    ok = d.i >= 0 && d.i + 1 < net.rows() && d.j >= 1 && d.j + 1 < net.cols();
    if (ok) r = {net.index(d.i, d.j), net.index(d.i + 1, d.j), face_id(net, d.i, d.j - 1), face_id(net, d.i, d.j)};
  } else if (d.dir == EdgeDir::PlusJ) {
    ok = d.i >= 1 && d.i + 1 < net.rows() && d.j >= 0 && d.j + 1 < net.cols();
    if (ok) r = {net.index(d.i, d.j), net.index(d.i, d.j + 1), face_id(net, d.i - 1, d.j), face_id(net, d.i, d.j)};
  }
  if (!ok) throw Error(ErrorCode::InvalidInput, "driver edge at " + ij(d.i, d.j) + " is not interior");
  return r;
}

std::pair<int, int> face_ij(const Net& net, int f) { return {f / (net.cols() - 1), f % (net.cols() - 1)}; }

Vec3 oriented_normal(const Net& net, int i, int j) {
  const Vec3 n = (net(i + 1, j + 1) - net(i, j)).cross(net(i, j + 1) - net(i + 1, j));
  if (n.norm() == 0) throw Error(ErrorCode::DegenerateFace, "face " + ij(i, j) + " has parallel diagonals");
  return n.normalized();
}

FlexionState make_state(const Net& net, FlexGeometry g) {
  if (net.rows() < 2 || net.cols() < 2) throw Error(ErrorCode::InvalidInput, "flexion needs at least one face");
  net.validate();
  FlexionState s;
  s.geometry = g;
  s.net = net;
  for (int i = 0; i < net.rows(); ++i)
    for (int j = 0; j < net.cols(); ++j) {
      if (i + 1 < net.rows()) s.pairs.emplace_back(net.index(i, j), net.index(i + 1, j));
      if (j + 1 < net.cols()) s.pairs.emplace_back(net.index(i, j), net.index(i, j + 1));
      if (i + 1 < net.rows() && j + 1 < net.cols()) {
        s.pairs.emplace_back(net.index(i, j), net.index(i + 1, j + 1));
        s.pairs.emplace_back(net.index(i + 1, j), net.index(i, j + 1));
      }
    }
  for (auto [a, b] : s.pairs) {
    const Vec3 d = net.points().col(a) - net.points().col(b);
    s.sq_lengths.push_back(g == FlexGeometry::Isotropic ? d.head<2>().squaredNorm() : d.squaredNorm());
  }
  if (g == FlexGeometry::Isotropic)
    for (int i = 1; i + 1 < net.rows(); ++i)
      for (int j = 1; j + 1 < net.cols(); ++j) {
        s.omega_vertices.push_back(net.index(i, j));
        s.omega.push_back(curvature_omega(net, i, j, kInf));
      }
  return s;
}

// Offsets: vertices at 3v, per-face data at base + 3f, driver cross product after that.
struct Layout {
  int V, F, base, cross;
};

Layout layout(const Net& net) {
  const int V = net.size(), F = (net.rows() - 1) * (net.cols() - 1);
  return {V, F, 3 * V, 3 * V + 3 * F};
}

Eigen::VectorXd isotropic_vars(const Net& net) {
  const Layout L = layout(net);
  Eigen::VectorXd x(3 * L.V + 3 * L.F);
  for (int v = 0; v < L.V; ++v) x.segment<3>(3 * v) = net.points().col(v);
  for (int f = 0; f < L.F; ++f) {
    const auto [i, j] = face_ij(net, f);
    const Plane p = fitted_plane(net, i, j);
    x.segment<3>(L.base + 3 * f) << p.A, p.B, p.C;
  }
  return x;
}

Eigen::VectorXd euclidean_vars(const Net& net, const FlexDriver& d) {
  const Layout L = layout(net);
  Eigen::VectorXd x(3 * L.V + 3 * L.F + 3);
  for (int v = 0; v < L.V; ++v) x.segment<3>(3 * v) = net.points().col(v);
  for (int f = 0; f < L.F; ++f) {
    const auto [i, j] = face_ij(net, f);
    x.segment<3>(L.base + 3 * f) = oriented_normal(net, i, j);
  }
  const DriverFaces df = driver_faces(net, d);
  x.segment<3>(L.cross) = Vec3(x.segment<3>(L.base + 3 * df.f1)).cross(Vec3(x.segment<3>(L.base + 3 * df.f2)));
  return x;
}

void length_constraints(const FlexionState& s, double eps, Constraints& out) {
  for (size_t k = 0; k < s.pairs.size(); ++k) {
    const auto [a, b] = s.pairs[k];
    const AffineVec3 e = var3(3 * a) - var3(3 * b);
    QuadraticConstraint c = dot(e, e, eps);
    c.constant -= s.sq_lengths[k];
    c.group = Group::Flex;
    out.push_back(std::move(c));
  }
}

Constraints isotropic_constraints(const FlexionState& s, const FlexDriver& d, double target) {
  const Net& net = s.net;
  const Layout L = layout(net);
  Constraints out;
  length_constraints(s, 0.0, out);
  // corners on the face plane z = A x + B y + C
  for (int f = 0; f < L.F; ++f) {
    const auto [i, j] = face_ij(net, f);
    const int o = L.base + 3 * f;
    for (int v : face_corners(net, i, j)) {
      QuadraticConstraint c;
      c.quad = {{o, 3 * v, -1.0}, {o + 1, 3 * v + 1, -1.0}};
      c.lin = {{3 * v + 2, 1.0}, {o + 2, -1.0}};
      c.group = Group::Flex;
      out.push_back(std::move(c));
    }
  }
  // Omega = 1/2 sum det(p_k, p_k+1) over the dual top views
  for (size_t k = 0; k < s.omega_vertices.size(); ++k) {
    const int v = s.omega_vertices[k], i = v / net.cols(), j = v % net.cols();
    const std::array<int, 4> fs{face_id(net, i - 1, j - 1), face_id(net, i, j - 1), face_id(net, i, j),
                                face_id(net, i - 1, j)};
    QuadraticConstraint c;
    for (int t = 0; t < 4; ++t) {
      const int p = L.base + 3 * fs[t], q = L.base + 3 * fs[(t + 1) % 4];
      c.quad.emplace_back(p, q + 1, 0.5);
      c.quad.emplace_back(p + 1, q, -0.5);
    }
    c.constant = -s.omega[k];
    c.group = Group::Flex;
    out.push_back(std::move(c));
  }
  // driver: det(e_xy, p2 - p1) = |e_xy| theta
  const DriverFaces df = driver_faces(net, d);
  const int p1 = L.base + 3 * df.f1, p2 = L.base + 3 * df.f2;
  const AffineVec3 e = var3(3 * df.b) - var3(3 * df.a);
  AffineVec3 rot;
  rot[0] = Affine{{{p2 + 1, 1.0}, {p1 + 1, -1.0}}, 0.0};
  rot[1] = Affine{{{p2, -1.0}, {p1, 1.0}}, 0.0};
  QuadraticConstraint c = dot(e, rot, 0.0);
  const Vec3 e0 = net.points().col(df.b) - net.points().col(df.a);
  c.constant -= e0.head<2>().norm() * target;
  c.group = Group::Driver;
  out.push_back(std::move(c));
  return out;
}

Constraints euclidean_constraints(const FlexionState& s, const FlexDriver& d, double target) {
  const Net& net = s.net;
  const Layout L = layout(net);
  Constraints out;
  length_constraints(s, 1.0, out);
  for (int f = 0; f < L.F; ++f) {
    const auto [i, j] = face_ij(net, f);
    const AffineVec3 n = var3(L.base + 3 * f);
    QuadraticConstraint unit = dot(n, n);
    unit.constant -= 1;
    unit.group = Group::Flex;
    out.push_back(std::move(unit));
    const auto cs = face_corners(net, i, j);
    for (int k = 1; k < 4; ++k) {
      QuadraticConstraint c = dot(n, var3(3 * cs[k]) - var3(3 * cs[0]));
      c.group = Group::Flex;
      out.push_back(std::move(c));
    }
  }
  const DriverFaces df = driver_faces(net, d);
  const int n1 = L.base + 3 * df.f1, n2 = L.base + 3 * df.f2;
  // c = n1 x n2
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    QuadraticConstraint c;
    c.lin = {{L.cross + k, 1.0}};
    c.quad = {{n1 + a, n2 + b, -1.0}, {n1 + b, n2 + a, 1.0}};
    c.group = Group::Driver;
    out.push_back(std::move(c));
  }
  QuadraticConstraint c = dot(var3(L.cross), var3(3 * df.b) - var3(3 * df.a));
  const double len = std::sqrt(s.sq_lengths.empty() ? 0.0 : (net.points().col(df.b) - net.points().col(df.a)).squaredNorm());
  c.constant -= len * std::sin(target);
  c.group = Group::Driver;
  out.push_back(std::move(c));
  return out;
}

Net net_from_vars(const Net& ref, const Eigen::VectorXd& x) {
  Net out = ref;
  for (int v = 0; v < ref.size(); ++v) out.points().col(v) = x.segment<3>(3 * v);
  return out;
}

template <typename Build, typename Angle>
FlexResult run_flexion(const FlexionState& state, const FlexDriver& driver, int steps, const FlexOptions& opt,
                       Eigen::VectorXd x, Build build, Angle angle) {
  if (steps < 1) throw Error(ErrorCode::InvalidInput, "flexion needs at least one step");
  FlexResult r;
  r.start_angle = angle(state.net, driver);
  r.steps.push_back({.t = state.t, .net = state.net, .angle = r.start_angle});
  for (int k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    const double target = r.start_angle + t * (driver.target - r.start_angle);
    const Constraints cs = build(target);
    double lambda = opt.lm.lambda0;
    FlexStep st;
    st.t = t;
    double e = energies(cs, x).hard;
    for (; st.iterations < opt.max_iter && e > opt.converge_energy; ++st.iterations) {
      try {
        e = lm_step(x, cs, lambda, opt.lm).energy_after;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::StallDetected) throw;
        break;
      }
    }
    st.e_hard = e;
    for (const auto& c : cs) st.max_residual = std::max(st.max_residual, std::abs(c.value(x)));
    if (!(st.max_residual <= opt.residual_tol)) {
      const std::string msg = "step " + std::to_string(k) + " ended with residual " + std::to_string(st.max_residual);
      if (!opt.keep_partial) throw Error(ErrorCode::StepFailed, msg);
      r.failed_step = k;
      r.failure = msg;
      return r;
    }
    st.net = net_from_vars(state.net, x);
    st.angle = angle(st.net, driver);
    r.steps.push_back(std::move(st));
  }
  return r;
}

}  // namespace

FlexionState FlexionState::isotropic(const Net& net) { return make_state(net, FlexGeometry::Isotropic); }
FlexionState FlexionState::euclidean(const Net& net) { return make_state(net, FlexGeometry::Euclidean); }

double isotropic_dihedral(const Net& net, const FlexDriver& d) {
  const DriverFaces df = driver_faces(net, d);
  const auto [i1, j1] = face_ij(net, df.f1);
  const auto [i2, j2] = face_ij(net, df.f2);
  const Plane p1 = fitted_plane(net, i1, j1), p2 = fitted_plane(net, i2, j2);
  const Vec2 e = (net.points().col(df.b) - net.points().col(df.a)).head<2>();
  if (e.norm() == 0) throw Error(ErrorCode::ZeroEdge, "driver edge has a degenerate top view");
  return cross2(e, Vec2(p2.A - p1.A, p2.B - p1.B)) / e.norm();
}

double euclidean_dihedral(const Net& net, const FlexDriver& d) {
  const DriverFaces df = driver_faces(net, d);
  const auto [i1, j1] = face_ij(net, df.f1);
  const auto [i2, j2] = face_ij(net, df.f2);
  const Vec3 n1 = oriented_normal(net, i1, j1), n2 = oriented_normal(net, i2, j2);
  const Vec3 e = (net.points().col(df.b) - net.points().col(df.a)).normalized();
  return std::atan2(e.dot(n1.cross(n2)), n1.dot(n2));
}

FlexResult isotropic_flexion(const FlexionState& state, const FlexDriver& driver, int steps, const FlexOptions& opt) {
  if (state.geometry != FlexGeometry::Isotropic) throw Error(ErrorCode::InvalidInput, "state is not isotropic");
  bool flexible = false;
  try {
    flexible = class_i_check(state.net).passes || class_ii_check(state.net).passes;
  } catch (const Error&) {
  }
  FlexResult r = run_flexion(
      state, driver, steps, opt, isotropic_vars(state.net),
      [&](double target) { return isotropic_constraints(state, driver, target); }, isotropic_dihedral);
  r.class_warning = !flexible;
  return r;
}

FlexResult euclidean_flexion(const FlexionState& state, const FlexDriver& driver, int steps, const FlexOptions& opt) {
  if (state.geometry != FlexGeometry::Euclidean) throw Error(ErrorCode::InvalidInput, "state is not Euclidean");
  return run_flexion(
      state, driver, steps, opt, euclidean_vars(state.net, driver),
      [&](double target) { return euclidean_constraints(state, driver, target); }, euclidean_dihedral);
}

FlexDrift flex_drift(const FlexionState& s, const Net& net) {
  FlexDrift d;
  for (size_t k = 0; k < s.pairs.size(); ++k) {
    const Vec3 e = net.points().col(s.pairs[k].first) - net.points().col(s.pairs[k].second);
    const double len = s.geometry == FlexGeometry::Isotropic ? e.head<2>().norm() : e.norm();
    d.length = std::max(d.length, std::abs(len - std::sqrt(s.sq_lengths[k])));
  }
  for (size_t k = 0; k < s.omega_vertices.size(); ++k) {
    const int v = s.omega_vertices[k];
    d.omega = std::max(d.omega, std::abs(curvature_omega(net, v / net.cols(), v % net.cols(), kInf) - s.omega[k]));
  }
  const double mean = net.mean_edge_length();
  for (int i = 0; i + 1 < net.rows(); ++i)
    for (int j = 0; j + 1 < net.cols(); ++j) d.planarity = std::max(d.planarity, fit_face_plane(net, i, j).max_distance / mean);
  return d;
}

Net miura_ori(int rows, int cols, double s, double h, double d, double l) {
  Net net(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) net(i, j) = Vec3(i * s + (j % 2) * d, j * l, (i % 2) * h);
  return net;
}

nlohmann::json flex_manifest(const FlexResult& r, const FlexDriver& d, const std::vector<std::string>& files) {
  nlohmann::json j;
  j["steps"] = static_cast<int>(r.steps.size()) - 1;
  j["driverEdge"] = {{"i", d.i}, {"j", d.j}, {"dir", d.dir == EdgeDir::PlusI ? "+i" : "+j"}};
  nlohmann::json schedule = nlohmann::json::array(), residuals = nlohmann::json::array(),
                 iterations = nlohmann::json::array(), angles = nlohmann::json::array();
  for (const auto& s : r.steps) {
    schedule.push_back(s.t);
    residuals.push_back(s.e_hard);
    iterations.push_back(s.iterations);
    angles.push_back(s.angle);
  }
  j["schedule"] = schedule;
  j["residuals"] = residuals;
  j["iterations"] = iterations;
  j["angles"] = angles;
  j["startAngle"] = r.start_angle;
  j["target"] = d.target;
  j["classWarning"] = r.class_warning;
  if (r.failed_step > 0) j["failedStep"] = r.failed_step;
  j["files"] = files;
  return j;
}

}  // namespace isoweb
