#include "isoweb/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <limits>
#include <numbers>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/Eigenvalues>

#include "isoweb/error.hpp"

namespace isoweb {

// --- affine algebra ---

AffineVec3 var3(int o) {
  AffineVec3 a;
  for (int k = 0; k < 3; ++k) a[k].terms = {{o + k, 1.0}};
  return a;
}

AffineVec3 const3(const Vec3& v) {
  AffineVec3 a;
  for (int k = 0; k < 3; ++k) a[k].c = v[k];
  return a;
}

namespace {

Affine combine(const Affine& a, double sa, const Affine& b, double sb) {
  Affine r;
  r.terms.reserve(a.terms.size() + b.terms.size());
  for (auto [i, c] : a.terms) r.terms.emplace_back(i, sa * c);
  for (auto [i, c] : b.terms) r.terms.emplace_back(i, sb * c);
  r.c = sa * a.c + sb * b.c;
  return r;
}

}  // namespace

AffineVec3 operator+(const AffineVec3& a, const AffineVec3& b) {
  AffineVec3 r;
  for (int k = 0; k < 3; ++k) r[k] = combine(a[k], 1, b[k], 1);
  return r;
}

AffineVec3 operator-(const AffineVec3& a, const AffineVec3& b) {
  AffineVec3 r;
  for (int k = 0; k < 3; ++k) r[k] = combine(a[k], 1, b[k], -1);
  return r;
}

AffineVec3 operator*(double s, const AffineVec3& a) {
  AffineVec3 r;
  for (int k = 0; k < 3; ++k) r[k] = combine(a[k], s, Affine{}, 0);
  return r;
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::ANet: return "anet";
    case Group::Geodesic: return "geodesic";
    case Group::Coupling: return "coupling";
    case Group::Angle: return "angle";
    case Group::Fairness: return "fairness";
    case Group::SurfaceClose: return "surfClose";
    case Group::VertexClose: return "vertClose";
    case Group::CurveClose: return "curveClose";
    case Group::Flex: return "flex";
    case Group::Driver: return "driver";
    case Group::Misc: return "misc";
  }
  return "?";
}

double QuadraticConstraint::value(const Eigen::VectorXd& x) const {
  double r = constant;
  for (const auto& [a, b, q] : quad) r += q * x[a] * x[b];
  for (const auto& [a, l] : lin) r += l * x[a];
  return r;
}

void QuadraticConstraint::gradient(const Eigen::VectorXd& x, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  for (const auto& [a, b, q] : quad) {
    out.emplace_back(a, q * x[b]);
    out.emplace_back(b, q * x[a]);
  }
  for (const auto& [a, l] : lin) out.emplace_back(a, l);
}

QuadraticConstraint dot(const AffineVec3& a, const AffineVec3& b, double eps) {
  QuadraticConstraint c;
  for (int k = 0; k < 3; ++k) {
    const double m = k == 2 ? eps : 1.0;
    if (m == 0) continue;
    for (auto [ia, ca] : a[k].terms)
      for (auto [ib, cb] : b[k].terms) c.quad.emplace_back(ia, ib, m * ca * cb);
    if (b[k].c != 0)
      for (auto [ia, ca] : a[k].terms) c.lin.emplace_back(ia, m * ca * b[k].c);
    if (a[k].c != 0)
      for (auto [ib, cb] : b[k].terms) c.lin.emplace_back(ib, m * cb * a[k].c);
    c.constant += m * a[k].c * b[k].c;
  }
  return c;
}

void append_scaled(QuadraticConstraint& a, const QuadraticConstraint& b, double s) {
  for (const auto& [i, j, q] : b.quad) a.quad.emplace_back(i, j, s * q);
  for (const auto& [i, l] : b.lin) a.lin.emplace_back(i, s * l);
  a.constant += s * b.constant;
}

QuadraticConstraint affine_constraint(const Affine& a) {
  QuadraticConstraint c;
  c.lin = a.terms;
  c.constant = a.c;
  return c;
}

Energies energies(const Constraints& cs, const Eigen::VectorXd& x) {
  Energies e;
  for (const auto& c : cs) {
    const double r = c.value(x);
    (c.hard ? e.hard : e.soft) += c.weight * r * r;
  }
  return e;
}

// --- Levenberg-Marquardt ---

LmStep lm_step(Eigen::VectorXd& x, const Constraints& cs, double& lambda, const LmOptions& opt) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(cs.size());
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd r(m);
  std::vector<std::pair<int, double>> g;
  for (int k = 0; k < m; ++k) {
    const double sw = std::sqrt(cs[k].weight);
    r[k] = sw * cs[k].value(x);
    cs[k].gradient(x, g);
    for (auto [i, v] : g) trip.emplace_back(k, i, sw * v);
  }
  if (!r.allFinite()) throw Error(ErrorCode::LinearSolveFailure, "non-finite residuals");
  Eigen::SparseMatrix<double> J(m, n);
  J.setFromTriplets(trip.begin(), trip.end());

  LmStep st;
  st.energy_before = r.squaredNorm();
  const Eigen::VectorXd grad = J.transpose() * r;
  if (grad.norm() == 0) {
    st.energy_after = st.energy_before;
    st.lambda = lambda;
    return st;
  }
  const Eigen::SparseMatrix<double> JtJ = J.transpose() * J;
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  for (;;) {
    const Eigen::SparseMatrix<double> N = JtJ + lambda * I;
    if (!analyzed) ldlt.analyzePattern(N), analyzed = true;
    ldlt.factorize(N);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::LinearSolveFailure, "normal equations not factorizable");
    Eigen::VectorXd delta = ldlt.solve(-grad);
    // one refinement pass keeps the relative residual near machine precision
    const Eigen::VectorXd res = -grad - N * delta;
    if (res.norm() > 1e-10 * grad.norm()) delta += ldlt.solve(res);
    if (!delta.allFinite()) throw Error(ErrorCode::LinearSolveFailure, "non-finite step");

    const Eigen::VectorXd xn = x + delta;
    double en = 0;
    for (const auto& c : cs) {
      const double v = c.value(xn);
      en += c.weight * v * v;
    }
    if (en < st.energy_before) {
      x = xn;
      st.energy_after = en;
      st.step_norm = delta.norm();
      st.lambda = lambda;
      lambda = std::max(lambda * opt.down, 1e-15);
      return st;
    }
    lambda *= opt.up;
    ++st.retries;
    if (lambda > opt.lambda_max)
      throw Error(ErrorCode::StallDetected, "damping exceeded " + std::to_string(opt.lambda_max));
  }
}

// --- state ---

namespace {

Vec3 star_normal(const std::vector<Vec3>& pts) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double scale = 0;
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose(), scale = std::max(scale, (p - c).norm());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // collinear star: the two smallest eigenvalues vanish, no plane
  if (scale == 0 || es.eigenvalues()[1] <= 1e-24 * scale * scale) return Vec3(0, 0, 1);
  Vec3 nrm = es.eigenvectors().col(0);
  if (nrm.z() < 0) nrm = -nrm;
  return nrm;
}

std::vector<Stencil> anet_stencils(WebKind kind) {
  switch (kind) {
    case WebKind::AAG:
    case WebKind::CRPC: return {Stencil::Parameter};
    case WebKind::AGAG: return {Stencil::DiagonalEven, Stencil::DiagonalOdd};
    default: return {};
  }
}

std::vector<Family> families_with(const NetRoles& roles, LineRole role) {
  std::vector<Family> out;
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus, Family::DiagPlus})
    if (roles.of(f) == role) out.push_back(f);
  return out;
}

bool supported(WebKind k) {
  return k == WebKind::GGG || k == WebKind::AAG || k == WebKind::AGAG || k == WebKind::CRPC;
}

}  // namespace

Net SolverState::net() const {
  Net n(rows, cols);
  n.points() = Eigen::Map<const Eigen::Matrix3Xd>(x.data(), 3, vertex_count());
  n.kind = kind;
  n.roles = roles;
  return n;
}

SolverState init_aux_variables(const Net& net, WebKind kind) {
  if (!supported(kind)) throw Error(ErrorCode::InconsistentRoles, "unsupported kind " + std::string(to_string(kind)));
  if (net.kind != WebKind::Generic && net.kind != kind)
    throw Error(ErrorCode::InconsistentRoles,
                "net is " + std::string(to_string(net.kind)) + ", requested " + std::string(to_string(kind)));
  if (net.kind == kind && !(net.roles == NetRoles::for_kind(kind)))
    throw Error(ErrorCode::InconsistentRoles, "role tags do not match kind");

  SolverState s;
  s.rows = net.rows();
  s.cols = net.cols();
  s.kind = kind;
  s.roles = NetRoles::for_kind(kind);
  const int V = net.size();
  std::vector<double> vals(net.points().data(), net.points().data() + 3 * V);
  s.n_anet.assign(V, -1);
  s.n_geo.assign(V, -1);
  auto push = [&](const Vec3& v) {
    const int o = static_cast<int>(vals.size());
    vals.insert(vals.end(), {v.x(), v.y(), v.z()});
    return o;
  };

  for (Stencil st : anet_stencils(kind))
    for (int i = 0; i < net.rows(); ++i)
      for (int j = 0; j < net.cols(); ++j) {
        if (!stencil_center(net, i, j, st)) continue;
        const auto nb = stencil_neighbors(net, i, j, st);
        if (nb.size() < 3) continue;
        std::vector<Vec3> pts{net(i, j)};
        for (auto r : nb) pts.push_back(net(r.i, r.j));
        s.n_anet[net.index(i, j)] = push(star_normal(pts));
      }

  for (Family fam : families_with(s.roles, LineRole::Geodesic))
    for (const auto& poly : family_polylines(net, fam))
      for (int k = 1; k + 1 < poly.size(); ++k) {
        if (!poly.interior[k]) continue;
        const auto [pi, pj] = poly.verts[k - 1];
        const auto [ci, cj] = poly.verts[k];
        const auto [ni, nj] = poly.verts[k + 1];
        Vec3 b;
        try {
          b = discrete_binormal(net(pi, pj), net(ci, cj), net(ni, nj));
        } catch (const Error&) {
          // straight segment: horizontal normal of the top-view line
          const Vec2 t = top_view(Vec3(net(ni, nj) - net(pi, pj)));
          b = t.norm() > 0 ? Vec3(-t.y(), t.x(), 0).normalized() : Vec3(1, 0, 0);
          s.binormal_fallback = true;
        }
        const int c = net.index(ci, cj);
        if (s.n_geo[c] < 0) s.n_geo[c] = push(Vec3(0, 0, 1));
        s.binormals.push_back({fam, c, net.index(pi, pj), net.index(ni, nj), push(b)});
      }

  s.x = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return s;
}

void set_positions(SolverState& s, const Net& net) {
  if (net.rows() != s.rows || net.cols() != s.cols) throw Error(ErrorCode::InvalidInput, "net size mismatch");
  s.x.head(3 * s.vertex_count()) = Eigen::Map<const Eigen::VectorXd>(net.points().data(), 3 * s.vertex_count());
}

// --- builders ---

void build_anet_constraints(const SolverState& s, Stencil stencil, Constraints& out) {
  const Net topo(s.rows, s.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int j = 0; j < s.cols; ++j) {
      const int v = topo.index(i, j);
      if (!stencil_center(topo, i, j, stencil) || s.n_anet[v] < 0) continue;
      const AffineVec3 n = var3(s.n_anet[v]);
      for (auto r : stencil_neighbors(topo, i, j, stencil)) {
        auto c = dot(n, var3(3 * v) - var3(3 * topo.index(r.i, r.j)));
        c.group = Group::ANet;
        out.push_back(std::move(c));
      }
      auto u = dot(n, n);
      u.constant -= 1;
      u.group = Group::ANet;
      out.push_back(std::move(u));
    }
}

void build_geodesic_constraints(const SolverState& s, Family family, double eps, Constraints& out) {
  // unit-norm rows for shared normals belong to the first family meeting the vertex
  std::vector<int> first(s.vertex_count(), 99);
  for (const auto& b : s.binormals) first[b.center] = std::min(first[b.center], static_cast<int>(b.family));

  auto add = [&](QuadraticConstraint c) {
    c.group = Group::Geodesic;
    out.push_back(std::move(c));
  };
  for (const auto& b : s.binormals) {
    if (b.family != family) continue;
    const AffineVec3 bv = var3(b.offset), fc = var3(3 * b.center);
    add(dot(bv, fc - var3(3 * b.prev), eps));
    add(dot(bv, fc - var3(3 * b.next), eps));
    add(dot(bv, var3(s.n_geo[b.center]), eps));
    auto u = dot(bv, bv);
    u.constant -= 1;
    add(std::move(u));
    if (first[b.center] == static_cast<int>(family)) {
      auto un = dot(var3(s.n_geo[b.center]), var3(s.n_geo[b.center]));
      un.constant -= 1;
      add(std::move(un));
    }
  }
}

void build_normal_coupling(const SolverState& s, double eps, Constraints& out) {
  const Net topo(s.rows, s.cols);
  for (int i = 1; i + 1 < s.rows; ++i)
    for (int j = 1; j + 1 < s.cols; ++j) {
      const int v = topo.index(i, j);
      if (s.n_geo[v] < 0) continue;
      // central-difference tangents of the i- and j-lines
      for (auto [a, b] : {std::pair{topo.index(i + 1, j), topo.index(i - 1, j)},
                          std::pair{topo.index(i, j + 1), topo.index(i, j - 1)}}) {
        auto c = dot(var3(s.n_geo[v]), var3(3 * a) - var3(3 * b), eps);
        c.group = Group::Coupling;
        out.push_back(std::move(c));
      }
    }
}

namespace {

void push_rows(const AffineVec3& e, double weight, bool hard, Group g, Constraints& out) {
  for (int k = 0; k < 3; ++k) {
    auto c = affine_constraint(e[k]);
    c.weight = weight;
    c.hard = hard;
    c.group = g;
    out.push_back(std::move(c));
  }
}

}  // namespace

void build_fairness(const SolverState& s, const std::vector<Family>& families, double weight, Constraints& out) {
  const Net topo(s.rows, s.cols);
  for (Family fam : families)
    for (const auto& poly : family_polylines(topo, fam))
      for (int k = 1; k + 1 < poly.size(); ++k) {
        const VertexRef a = poly.verts[k - 1], b = poly.verts[k], c = poly.verts[k + 1];
        const int ia = topo.index(a.i, a.j), ib = topo.index(b.i, b.j), ic = topo.index(c.i, c.j);
        const AffineVec3 fa = var3(3 * ia), fb = var3(3 * ib), fc = var3(3 * ic);
        if (!topo.is_boundary(a.i, a.j) && !topo.is_boundary(b.i, b.j) && !topo.is_boundary(c.i, c.j)) {
          push_rows(2.0 * fb - fa - fc, weight, false, Group::Fairness, out);
          continue;
        }
        const double l1 = (s.f(ib) - s.f(ia)).norm(), l2 = (s.f(ic) - s.f(ib)).norm();
        if (l1 == 0 || l2 == 0) throw Error(ErrorCode::ZeroEdge, "coincident consecutive vertices on a web curve");
        push_rows((1.0 / l1) * (fb - fa) - (1.0 / l2) * (fc - fb), weight, false, Group::Fairness, out);
      }
}

void build_surface_closeness(const SolverState& s, double weight, Constraints& out) {
  const Net net = s.net();
  for (int i = 1; i + 1 < s.rows; ++i)
    for (int j = 1; j + 1 < s.cols; ++j) {
      Vec3 n;
      try {
        n = discrete_normal(net, i, j);
      } catch (const Error&) {
        continue;
      }
      const int v = net.index(i, j);
      auto c = dot(var3(3 * v) - const3(s.f(v)), const3(n));
      c.weight = weight;
      c.hard = false;
      c.group = Group::SurfaceClose;
      out.push_back(std::move(c));
    }
}

void build_vertex_closeness(const SolverState& s, const std::vector<int>& vertices, double weight, Constraints& out,
                            bool hard) {
  for (int v : vertices) push_rows(var3(3 * v) - const3(s.f(v)), weight, hard, Group::VertexClose, out);
}

void build_curve_closeness(const SolverState& s, const std::vector<int>& vertices, const std::vector<Vec3>& curve,
                           double weight, Constraints& out) {
  if (curve.size() < 2) throw Error(ErrorCode::NoFootPoint, "reference curve has fewer than two points");
  for (int v : vertices) {
    const Vec3 p = s.f(v);
    double best = std::numeric_limits<double>::infinity();
    Vec3 foot, tangent;
    for (size_t k = 0; k + 1 < curve.size(); ++k) {
      const Vec3 d = curve[k + 1] - curve[k];
      const double len2 = d.squaredNorm();
      if (len2 == 0) continue;
      const double t = std::clamp((p - curve[k]).dot(d) / len2, 0.0, 1.0);
      const Vec3 q = curve[k] + t * d;
      if ((p - q).norm() < best) best = (p - q).norm(), foot = q, tangent = d.normalized();
    }
    if (!std::isfinite(best)) throw Error(ErrorCode::NoFootPoint, "no foot point on reference curve");
    const Vec3 helper = std::abs(tangent.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
    const Vec3 e2 = tangent.cross(helper).normalized(), e3 = tangent.cross(e2);
    for (const Vec3& e : {e2, e3}) {
      auto c = dot(var3(3 * v) - const3(foot), const3(e));
      c.weight = weight;
      c.hard = false;
      c.group = Group::CurveClose;
      out.push_back(std::move(c));
    }
  }
}

void build_angle_constraints(const SolverState& s, double gamma, double eps, const std::vector<char>& face_included,
                             Constraints& out) {
  const double cg = std::cos(gamma);
  for (int i = 0; i + 1 < s.rows; ++i)
    for (int j = 0; j + 1 < s.cols; ++j) {
      const int face = i * (s.cols - 1) + j;
      if (!face_included.empty() && !face_included[face]) continue;
      const int v0 = i * s.cols + j, v1 = (i + 1) * s.cols + j, v2 = (i + 1) * s.cols + j + 1, v3 = i * s.cols + j + 1;
      // central lines through edge midpoints, same convention as face_central_angle
      const AffineVec3 u = 0.5 * (var3(3 * v2) + var3(3 * v3) - var3(3 * v0) - var3(3 * v1));
      const AffineVec3 w = 0.5 * (var3(3 * v3) + var3(3 * v0) - var3(3 * v1) - var3(3 * v2));
      const Vec3 up = 0.5 * (s.f(v2) + s.f(v3) - s.f(v0) - s.f(v1));
      const Vec3 wp = 0.5 * (s.f(v3) + s.f(v0) - s.f(v1) - s.f(v2));
      const double lu = std::sqrt(iso_inner(up, up, eps)), lw = std::sqrt(iso_inner(wp, wp, eps));
      if (lu == 0 || lw == 0)
        throw Error(ErrorCode::DegenerateFace, "central line of face (" + std::to_string(i) + "," +
                                                   std::to_string(j) + ") has zero length");
      // cos(gamma) times the mean of the squared relative lengths: equals
      // cos(gamma) at the previous iterate and scales like the inner product
      const AffineVec3 un = (1.0 / lu) * u, wn = (1.0 / lw) * w;
      auto c = dot(un, wn, eps);
      append_scaled(c, dot(un, un, eps), -0.5 * cg);
      append_scaled(c, dot(wn, wn, eps), -0.5 * cg);
      c.group = Group::Angle;
      out.push_back(std::move(c));
    }
}

std::vector<char> angle_face_mask(const Net& net, const std::vector<Vec2>& flat_points, double radius) {
  std::vector<char> mask(static_cast<size_t>(std::max(0, (net.rows() - 1) * (net.cols() - 1))), 1);
  for (int i = 0; i + 1 < net.rows(); ++i)
    for (int j = 0; j + 1 < net.cols(); ++j) {
      char& m = mask[i * (net.cols() - 1) + j];
      if (net.is_boundary(i, j) || net.is_boundary(i + 1, j + 1)) {
        m = 0;
        continue;
      }
      const Vec2 c = 0.25 * (net.xy(i, j) + net.xy(i + 1, j) + net.xy(i + 1, j + 1) + net.xy(i, j + 1));
      for (const auto& p : flat_points)
        if ((c - p).norm() <= radius) m = 0;
    }
  return mask;
}

// --- energies ---

Weights default_weights(WebKind kind) {
  double w = 1e-3;
  switch (kind) {
    case WebKind::AAG: w = 5e-3; break;
    case WebKind::AGAG: w = 1e-2; break;
    case WebKind::CRPC: w = 5e-3; break;
    default: break;
  }
  return {w, w, w};
}

SolverConfig SolverConfig::for_kind(WebKind kind) {
  SolverConfig c;
  c.weights = default_weights(kind);
  return c;
}

nlohmann::json config_to_json(const SolverConfig& c, WebKind kind) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind));
  j["gamma"] = c.gamma * 180.0 / std::numbers::pi;
  j["epsSchedule"] = c.eps_schedule;
  j["weights"] = {{"fairness", c.weights.fairness}, {"surfClose", c.weights.surf_close},
                  {"vertClose", c.weights.vert_close}};
  j["maxIterPerEps"] = c.max_iter_per_eps;
  j["hardTarget"] = c.hard_target;
  j["decayEvery"] = c.decay_every;
  j["decaySteps"] = c.decay_steps;
  j["lm"] = {{"lambda0", c.lm.lambda0}, {"up", c.lm.up}, {"down", c.lm.down}, {"max", c.lm.lambda_max}};
  nlohmann::json fp = nlohmann::json::array();
  for (const auto& p : c.flat_points) fp.push_back({p.x(), p.y()});
  j["flatPoints"] = fp;
  j["flatRadius"] = c.flat_radius;
  return j;
}

SolverConfig config_from_json(const nlohmann::json& j, WebKind kind) {
  SolverConfig c = SolverConfig::for_kind(kind);
  try {
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>() * std::numbers::pi / 180.0;
    if (j.contains("epsSchedule")) c.eps_schedule = j.at("epsSchedule").get<std::vector<double>>();
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      c.weights.fairness = w.value("fairness", c.weights.fairness);
      c.weights.surf_close = w.value("surfClose", c.weights.surf_close);
      c.weights.vert_close = w.value("vertClose", c.weights.vert_close);
    }
    c.max_iter_per_eps = j.value("maxIterPerEps", c.max_iter_per_eps);
    c.hard_target = j.value("hardTarget", c.hard_target);
    c.decay_every = j.value("decayEvery", c.decay_every);
    c.decay_steps = j.value("decaySteps", c.decay_steps);
    if (j.contains("lm")) {
      const auto& l = j.at("lm");
      c.lm.lambda0 = l.value("lambda0", c.lm.lambda0);
      c.lm.up = l.value("up", c.lm.up);
      c.lm.down = l.value("down", c.lm.down);
      c.lm.lambda_max = l.value("max", c.lm.lambda_max);
    }
    if (j.contains("flatPoints"))
      for (const auto& p : j.at("flatPoints")) c.flat_points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    c.flat_radius = j.value("flatRadius", c.flat_radius);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("solver config: ") + e.what());
  }
  return c;
}

Constraints assemble_energy(const SolverState& s, WebKind kind, double eps, const SolverConfig& cfg,
                            const Weights& w) {
  Constraints cs;
  switch (kind) {
    case WebKind::GGG:
      for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus}) build_geodesic_constraints(s, f, eps, cs);
      build_normal_coupling(s, eps, cs);
      break;
    case WebKind::AAG:
      build_anet_constraints(s, Stencil::Parameter, cs);
      build_geodesic_constraints(s, Family::DiagMinus, eps, cs);
      build_normal_coupling(s, eps, cs);
      break;
    case WebKind::AGAG:
      build_geodesic_constraints(s, Family::ILines, eps, cs);
      build_geodesic_constraints(s, Family::JLines, eps, cs);
      build_normal_coupling(s, eps, cs);
      build_anet_constraints(s, Stencil::DiagonalEven, cs);
      build_anet_constraints(s, Stencil::DiagonalOdd, cs);
      break;
    case WebKind::CRPC: {
      build_anet_constraints(s, Stencil::Parameter, cs);
      const Net net = s.net();
      build_angle_constraints(s, cfg.gamma, eps, angle_face_mask(net, cfg.flat_points, cfg.flat_radius), cs);
      if (!cfg.boundary_curve.empty()) {
        std::vector<int> bnd;
        for (int i = 0; i < s.rows; ++i)
          for (int j = 0; j < s.cols; ++j)
            if (net.is_boundary(i, j)) bnd.push_back(net.index(i, j));
        build_curve_closeness(s, bnd, cfg.boundary_curve, 1.0, cs);
        build_vertex_closeness(s, bnd, 1.0, cs);
      }
      break;
    }
    default: throw Error(ErrorCode::InconsistentRoles, "no energy for kind " + std::string(to_string(kind)));
  }

  std::vector<Family> fams;
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus, Family::DiagPlus})
    if (s.roles.of(f) != LineRole::None) fams.push_back(f);
  if (w.fairness > 0) build_fairness(s, fams, w.fairness, cs);
  if (w.surf_close > 0) build_surface_closeness(s, w.surf_close, cs);
  if (w.vert_close > 0) {
    std::vector<int> all(s.vertex_count());
    for (int v = 0; v < s.vertex_count(); ++v) all[v] = v;
    build_vertex_closeness(s, all, w.vert_close, cs);
  }
  return cs;
}

double initial_hard_energy(const Net& net, WebKind kind, double eps, const SolverConfig& cfg) {
  const SolverState s = init_aux_variables(net, kind);
  return energies(assemble_energy(s, kind, eps, cfg, Weights{0, 0, 0}), s.x).hard;
}

namespace {

Weights decayed(const SolverConfig& cfg, int it) {
  const int stage = cfg.decay_every > 0 ? it / cfg.decay_every : 0;
  if (stage > cfg.decay_steps) return {0, 0, 0};
  const double f = std::pow(10.0, -stage);
  return {cfg.weights.fairness * f, cfg.weights.surf_close * f, cfg.weights.vert_close * f};
}

void check_schedule(const SolverConfig& cfg) {
  const auto& e = cfg.eps_schedule;
  if (e.empty() || e.back() != 1.0) throw Error(ErrorCode::InvalidInput, "eps schedule must end at 1");
  for (size_t k = 0; k < e.size(); ++k) {
    if (e[k] < 0 || e[k] > 1) throw Error(ErrorCode::InvalidInput, "eps outside [0,1]");
    if (k > 0 && e[k] <= e[k - 1]) throw Error(ErrorCode::InvalidInput, "eps schedule must increase");
  }
  if (!(cfg.hard_target > 0)) throw Error(ErrorCode::InvalidInput, "hard target must be positive");
  if (cfg.max_iter_per_eps < 0) throw Error(ErrorCode::InvalidInput, "negative iteration limit");
}

}  // namespace

ContinuationResult run_continuation(const Net& net, WebKind kind, const SolverConfig& cfg) {
  check_schedule(cfg);
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ContinuationResult res;
  res.state = init_aux_variables(net, kind);
  SolverState& s = res.state;

  double e_hard = 0;
  for (double eps : cfg.eps_schedule) {
    EpsSummary sum;
    sum.eps = eps;
    double lambda = cfg.lm.lambda0;
    int it = 0;
    for (;;) {
      const Constraints cs = assemble_energy(s, kind, eps, cfg, decayed(cfg, it));
      e_hard = energies(cs, s.x).hard;
      if (e_hard <= cfg.hard_target) {
        sum.reached = true;
        break;
      }
      if (it >= cfg.max_iter_per_eps) break;
      const auto ts = clock::now();
      LmStep st;
      try {
        st = lm_step(s.x, cs, lambda, cfg.lm);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::StallDetected) throw;
        sum.stalled = true;
        break;
      }
      const Energies after = energies(cs, s.x);
      res.iterations.push_back({eps, it, after.hard, after.soft, st.step_norm, st.lambda,
                                std::chrono::duration<double>(clock::now() - ts).count()});
      ++it;
    }
    sum.iterations = it;
    sum.e_hard = e_hard;
    res.per_eps.push_back(sum);
  }
  res.final_e_hard = e_hard;
  res.converged = e_hard <= cfg.hard_target;
  res.net = s.net();
  res.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return res;
}

nlohmann::json stats_to_json(const ContinuationResult& r, const SolverConfig& cfg) {
  nlohmann::json j;
  j["V"] = r.state.vertex_count();
  j["Nv"] = r.state.num_vars();
  j["weights"] = {{"fairness", cfg.weights.fairness}, {"surfClose", cfg.weights.surf_close},
                  {"vertClose", cfg.weights.vert_close}};
  const double iters = static_cast<double>(r.iterations.size());
  double t = 0;
  for (const auto& s : r.iterations) t += s.seconds;
  j["iterations"] = r.iterations.size();
  j["timePerIter"] = iters > 0 ? t / iters : 0.0;
  j["totalSeconds"] = r.seconds;
  j["finalEHard"] = r.final_e_hard;
  j["converged"] = r.converged;
  nlohmann::json pe = nlohmann::json::array();
  for (const auto& s : r.per_eps)
    pe.push_back({{"eps", s.eps}, {"iterations", s.iterations}, {"eHard", s.e_hard}, {"reached", s.reached},
                  {"stalled", s.stalled}});
  j["perEps"] = pe;
  nlohmann::json it = nlohmann::json::array();
  for (const auto& s : r.iterations)
    it.push_back({{"eps", s.eps}, {"iteration", s.iteration}, {"eHard", s.e_hard}, {"eSoft", s.e_soft},
                  {"stepNorm", s.step_norm}, {"lambda", s.lambda}, {"seconds", s.seconds}});
  j["trace"] = it;
  return j;
}

double max_fairness_residual(const Net& net) {
  const double h = net.mean_edge_length();
  double worst = 0;
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus, Family::DiagPlus}) {
    if (net.roles.of(f) == LineRole::None) continue;
    for (const auto& p : family_polylines(net, f))
      for (int k = 1; k + 1 < p.size(); ++k) {
        const Vec3 a = net(p.verts[k - 1].i, p.verts[k - 1].j), b = net(p.verts[k].i, p.verts[k].j),
                   c = net(p.verts[k + 1].i, p.verts[k + 1].j);
        worst = std::max(worst, (2 * b - a - c).norm());
      }
  }
  return h > 0 ? worst / h : worst;
}

}  // namespace isoweb
