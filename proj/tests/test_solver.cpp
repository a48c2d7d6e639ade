#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "isoweb/error.hpp"
#include "isoweb/recipes.hpp"
#include "isoweb/solver.hpp"
#include "test_util.hpp"

using namespace isoweb;
using testutil::Rng;

namespace {

double paraboloid(double x, double y) { return 0.5 * (x * x + y * y); }

Net planar_grid(int rows, int cols, double h = 1.0) {
  return testutil::grid_net(rows, cols, [&](int i, int j) { return Vec3(i * h, j * h, 0); });
}

Net xy_grid(int n, double h) {
  return testutil::grid_net(n, n, [&](int i, int j) { return Vec3(i * h, j * h, i * h * j * h); });
}

double max_abs(const Constraints& cs, const Eigen::VectorXd& x) {
  double m = 0;
  for (const auto& c : cs) m = std::max(m, std::abs(c.value(x)));
  return m;
}

// central differences of one residual
Eigen::VectorXd fd_gradient(const QuadraticConstraint& c, Eigen::VectorXd x, double h) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  std::vector<int> idx;
  for (const auto& [a, b, q] : c.quad) idx.push_back(a), idx.push_back(b);
  for (const auto& [a, l] : c.lin) idx.push_back(a);
  for (int i : idx) {
    if (g[i] != 0) continue;
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = c.value(x);
    x[i] = x0 - h;
    const double fm = c.value(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

Eigen::VectorXd dense_gradient(const QuadraticConstraint& c, const Eigen::VectorXd& x) {
  std::vector<std::pair<int, double>> sp;
  c.gradient(x, sp);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (auto [i, v] : sp) g[i] += v;
  return g;
}

SolverState perturbed_state(const Net& net, WebKind kind, Rng& rng, double s) {
  SolverState st = init_aux_variables(net, kind);
  for (int k = 0; k < st.num_vars(); ++k) st.x[k] += s * rng.uniform();
  return st;
}

}  // namespace

TEST_CASE("quadratic residual algebra matches direct evaluation") {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x = Eigen::VectorXd::Random(12);
    x *= 2;
    const Vec3 c = rng.vec3(), eps3 = rng.vec3();
    const double eps = rng.uniform(0, 1);
    const AffineVec3 a = var3(0) - const3(c), b = 2.0 * var3(3) + var3(6) - var3(9);
    const auto q = dot(a, b, eps);
    const Vec3 av = x.segment<3>(0) - c, bv = 2 * x.segment<3>(3) + x.segment<3>(6) - x.segment<3>(9);
    CHECK(q.value(x) == doctest::Approx(iso_inner(av, bv, eps)).epsilon(1e-13));
    QuadraticConstraint sum = q;
    append_scaled(sum, dot(var3(0), const3(eps3)), -0.5);
    CHECK(sum.value(x) == doctest::Approx(q.value(x) - 0.5 * x.segment<3>(0).dot(eps3)).epsilon(1e-12));
  }
}

TEST_CASE("analytic Jacobians match central differences for every builder") {
  Rng rng(11);
  const Net ggg = recipes::ggg_pencil(6, 0.2, paraboloid);
  const Net aag = recipes::aag_propagation(6, 0.2, [](double x, double y) { return x * y; });
  const Net agag = recipes::agag_conic(7, 7, -0.3, 0.3, 1.27, 1.87, [](double x, double y) { return 0.3 * (x * x + y * y); });
  Net generic = aag;
  generic.kind = WebKind::Generic;
  generic.roles = {};
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double eps = rng.uniform(0, 1);
    Constraints cs;
    const int which = trial % 8;
    SolverState s;
    switch (which) {
      case 0:
        s = perturbed_state(aag, WebKind::AAG, rng, 0.05);
        build_anet_constraints(s, Stencil::Parameter, cs);
        break;
      case 1:
        s = perturbed_state(ggg, WebKind::GGG, rng, 0.05);
        build_geodesic_constraints(s, Family::DiagMinus, eps, cs);
        break;
      case 2:
        s = perturbed_state(agag, WebKind::AGAG, rng, 0.05);
        build_normal_coupling(s, eps, cs);
        break;
      case 3:
        s = perturbed_state(ggg, WebKind::GGG, rng, 0.02);
        build_fairness(s, {Family::ILines, Family::JLines, Family::DiagMinus}, 1e-3, cs);
        break;
      case 4:
        s = perturbed_state(aag, WebKind::AAG, rng, 0.02);
        build_surface_closeness(s, 1e-3, cs);
        break;
      case 5:
        s = perturbed_state(aag, WebKind::AAG, rng, 0.02);
        build_vertex_closeness(s, {0, 5, 17}, 1e-3, cs);
        break;
      case 6:
        s = perturbed_state(aag, WebKind::AAG, rng, 0.02);
        build_curve_closeness(s, {0, 1, 2, 3}, {Vec3(0, 0, 0), Vec3(0.3, 0.5, 0.1), Vec3(1, 1, 0.4)}, 1.0, cs);
        break;
      default:
        s = perturbed_state(generic, WebKind::CRPC, rng, 0.02);
        build_angle_constraints(s, rng.uniform(0.5, 2.5), eps, {}, cs);
        break;
    }
    REQUIRE_FALSE(cs.empty());
    // evaluate at a point away from the one the builder linearized around
    Eigen::VectorXd x = s.x;
    for (int k = 0; k < x.size(); ++k) x[k] += 0.01 * rng.uniform();
    for (size_t k = 0; k < cs.size(); k += 1 + cs.size() / 40) {
      const Eigen::VectorXd ga = dense_gradient(cs[k], x), gf = fd_gradient(cs[k], x, 1e-6);
      CHECK((ga - gf).norm() <= 1e-6 * std::max(1.0, ga.norm()));
      // quadratic: the gradient is affine along any line
      const Eigen::VectorXd d = Eigen::VectorXd::Random(x.size());
      const Eigen::VectorXd second = dense_gradient(cs[k], x + 2 * d) - 2 * dense_gradient(cs[k], x + d) + ga;
      CHECK(second.norm() <= 1e-12 * std::max(1.0, ga.norm() + d.norm()));
      ++checked;
    }
  }
  CHECK(checked > 800);
}

TEST_CASE("A-net constraint examples") {
  const Net xy = xy_grid(6, 0.3);
  SolverState s = init_aux_variables(xy, WebKind::CRPC);
  Constraints cs;
  build_anet_constraints(s, Stencil::Parameter, cs);
  CHECK(max_abs(cs, s.x) <= 1e-12);

  SolverState flat = init_aux_variables(planar_grid(5, 5), WebKind::CRPC);
  for (int v = 0; v < 25; ++v)
    if (flat.n_anet[v] >= 0) CHECK((flat.at(flat.n_anet[v]) - Vec3(0, 0, 1)).norm() == 0);
  cs.clear();
  build_anet_constraints(flat, Stencil::Parameter, cs);
  CHECK(max_abs(cs, flat.x) == 0);

  const int o = flat.n_anet[flat.rows * 2 + 2];
  flat.x.segment<3>(o) *= 2;
  cs.clear();
  build_anet_constraints(flat, Stencil::Parameter, cs);
  CHECK(max_abs(cs, flat.x) == doctest::Approx(3.0));
}

TEST_CASE("geodesic constraint examples") {
  // straight top view with heights: isotropic geodesic on a GGG web
  const Net net = recipes::ggg_pencil(4, 0.5, paraboloid);
  SolverState s = init_aux_variables(net, WebKind::GGG);
  for (const auto& b : s.binormals) CHECK(std::abs(s.at(b.offset).z()) <= 1e-12);
  Constraints cs;
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus}) build_geodesic_constraints(s, f, 0.0, cs);
  CHECK(max_abs(cs, s.x) <= 1e-12);

  // planar straight line at eps = 1 with b = (0,0,1) and an in-plane normal
  Net line = planar_grid(3, 3);
  SolverState ls = init_aux_variables(line, WebKind::GGG);
  for (const auto& b : ls.binormals) {
    ls.x.segment<3>(b.offset) = Vec3(0, 0, 1);
    ls.x.segment<3>(ls.n_geo[b.center]) = Vec3(1, 0, 0);
  }
  cs.clear();
  build_geodesic_constraints(ls, Family::ILines, 1.0, cs);
  CHECK(max_abs(cs, ls.x) == 0);

  // circle in the plane z = 0 with the surface normal (0,0,1): no unit b works
  const double t = 0.4;
  Net circ(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double r = 1 + 0.2 * (i - 1), a = t * (j - 1);
      circ(i, j) = Vec3(r * std::cos(a), r * std::sin(a), 0);
    }
  SolverState cs3 = init_aux_variables(circ, WebKind::GGG);
  const Vec3 p0 = circ(1, 0), p1 = circ(1, 1), p2 = circ(1, 2), n(0, 0, 1);
  Eigen::Matrix3d M = (p1 - p0) * (p1 - p0).transpose() + (p1 - p2) * (p1 - p2).transpose() + n * n.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  CHECK(es.eigenvalues()[0] > 1e-3);  // min over unit b of the squared residuals
  int bo = -1;
  for (const auto& bn : cs3.binormals)
    if (bn.family == Family::ILines) bo = bn.offset;
  REQUIRE(bo >= 0);
  cs3.x.segment<3>(cs3.n_geo[circ.index(1, 1)]) = n;
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    cs3.x.segment<3>(bo) = rng.vec3().normalized();
    Constraints g;
    build_geodesic_constraints(cs3, Family::ILines, 1.0, g);
    double e = 0;
    for (const auto& c : g) e += std::pow(c.value(cs3.x), 2);
    CHECK(e >= es.eigenvalues()[0] - 1e-12);
  }
}

TEST_CASE("collinear triples get the top-view binormal fallback") {
  const Net flat = planar_grid(4, 4);
  const SolverState s = init_aux_variables(flat, WebKind::GGG);
  CHECK(s.binormal_fallback);
  for (const auto& b : s.binormals) {
    CHECK(s.at(b.offset).norm() == doctest::Approx(1.0));
    CHECK(s.at(b.offset).z() == 0);
  }
  const SolverState curved = init_aux_variables(recipes::ggg_pencil(4, 0.5, paraboloid), WebKind::GGG);
  CHECK_FALSE(curved.binormal_fallback);
}

TEST_CASE("fairness forms") {
  auto line_state = [](std::vector<Vec3> pts) {
    Net net(1, static_cast<int>(pts.size()));
    for (int j = 0; j < net.cols(); ++j) net(0, j) = pts[j];
    SolverState s;
    s.rows = 1;
    s.cols = net.cols();
    s.x = Eigen::Map<Eigen::VectorXd>(net.points().data(), 3 * net.size());
    s.n_anet.assign(net.size(), -1);
    s.n_geo.assign(net.size(), -1);
    return s;
  };
  auto norm3 = [](const Constraints& cs, const Eigen::VectorXd& x, size_t first) {
    return std::sqrt(std::pow(cs[first].value(x), 2) + std::pow(cs[first + 1].value(x), 2) +
                     std::pow(cs[first + 2].value(x), 2));
  };
  // a single row: every vertex is a boundary vertex, so the unit-tangent form applies
  Constraints cs;
  SolverState uni = line_state({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
  build_fairness(uni, {Family::ILines}, 1.0, cs);
  CHECK(norm3(cs, uni.x, 0) == 0);
  cs.clear();
  SolverState uneven = line_state({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(3, 0, 0)});
  build_fairness(uneven, {Family::ILines}, 1.0, cs);
  CHECK(norm3(cs, uneven.x, 0) == doctest::Approx(0).epsilon(1e-15));
  // midpoint form on an interior line of a net with the same spacing
  Net net(5, 5);
  const double xs[5] = {0, 1, 3, 4, 5};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) net(i, j) = Vec3(i, xs[j], 0);
  SolverState grid = init_aux_variables(net, WebKind::CRPC);
  cs.clear();
  build_fairness(grid, {Family::ILines}, 1.0, cs);
  // i-line 2, vertex j = 2 has all three vertices off the boundary: midpoint form
  // rows are emitted in order (line, vertex), 3 rows each, 3 vertices per line
  const size_t at = (2 * 3 + 1) * 3;
  CHECK(norm3(cs, grid.x, at) == doctest::Approx(1.0));  // 2*3 - 1 - 4 = 1 in y
  cs.clear();
  SolverState corner = line_state({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)});
  build_fairness(corner, {Family::ILines}, 1.0, cs);
  CHECK(norm3(cs, corner.x, 0) == doctest::Approx(std::sqrt(2.0)));
  SolverState zero = line_state({Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 1, 0)});
  try {
    build_fairness(zero, {Family::ILines}, 1.0, cs);
    FAIL("expected ZeroEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroEdge);
  }
}

TEST_CASE("closeness terms") {
  const Net net = xy_grid(5, 0.25);
  SolverState s = init_aux_variables(net, WebKind::CRPC);
  Constraints surf, vert, curve;
  build_surface_closeness(s, 1.0, surf);
  build_vertex_closeness(s, {0, 6, 12}, 1.0, vert);
  const std::vector<Vec3> ref{Vec3(-1, 0, 0), Vec3(1, 0, 0), Vec3(1, 2, 0)};
  SolverState c = s;
  c.x.segment<3>(0) = Vec3(0.2, 0.3, -0.1);
  build_curve_closeness(c, {0}, ref, 1.0, curve);
  CHECK(max_abs(surf, s.x) == 0);
  CHECK(max_abs(vert, s.x) == 0);
  CHECK(max_abs(curve, c.x) == doctest::Approx(0.3));
  // sliding along the curve tangent is free
  Eigen::VectorXd moved = c.x;
  moved.segment<3>(0) += Vec3(0.25, 0, 0);
  for (const auto& q : curve) CHECK(q.value(moved) == doctest::Approx(q.value(c.x)).epsilon(1e-14));
  // motion along the previous normal by delta
  const Vec3 n = discrete_normal(net, 2, 2);
  Eigen::VectorXd x = s.x;
  x.segment<3>(3 * net.index(2, 2)) += 0.01 * n;
  double worst = 0;
  for (const auto& q : surf) worst = std::max(worst, std::abs(q.value(x)));
  CHECK(worst == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(build_curve_closeness(s, {0}, {Vec3(0, 0, 0)}, 1.0, curve), Error);
}

TEST_CASE("angle constraint examples") {
  SolverState s = init_aux_variables(planar_grid(4, 4), WebKind::CRPC);
  Constraints right, sixty;
  build_angle_constraints(s, std::numbers::pi / 2, 1.0, {}, right);
  build_angle_constraints(s, std::numbers::pi / 3, 1.0, {}, sixty);
  CHECK(right.size() == 9);
  CHECK(max_abs(right, s.x) <= 1e-15);
  for (const auto& c : sixty) CHECK(c.value(s.x) == doctest::Approx(-0.5).epsilon(1e-15));
  // at eps = 0 only the top view counts
  const Net xy = xy_grid(4, 0.5);
  SolverState t = init_aux_variables(xy, WebKind::CRPC);
  Constraints iso;
  build_angle_constraints(t, std::numbers::pi / 2, 0.0, {}, iso);
  CHECK(max_abs(iso, t.x) <= 1e-15);
  // face mask: boundary faces and faces near flat points are excluded
  const auto mask = angle_face_mask(planar_grid(6, 6), {Vec2(2.5, 2.5)}, 0.1);
  int on = 0;
  for (char m : mask) on += m;
  CHECK(on == 9 - 1);
  Net degenerate = planar_grid(2, 2);
  degenerate(1, 0) = degenerate(0, 0);
  degenerate(1, 1) = degenerate(0, 1);
  SolverState d = init_aux_variables(degenerate, WebKind::CRPC);
  Constraints none;
  CHECK_THROWS_AS(build_angle_constraints(d, 1.0, 1.0, {}, none), Error);
}

TEST_CASE("energy assembly per kind") {
  const Net xy = xy_grid(6, 0.3);
  SolverState s = init_aux_variables(xy, WebKind::CRPC);
  SolverConfig cfg = SolverConfig::for_kind(WebKind::CRPC);
  cfg.gamma = std::numbers::pi / 2;
  auto has = [](const Constraints& cs, Group g) {
    return std::any_of(cs.begin(), cs.end(), [g](const QuadraticConstraint& c) { return c.group == g; });
  };
  Constraints free = assemble_energy(s, WebKind::CRPC, 0.0, cfg, cfg.weights);
  CHECK(has(free, Group::ANet));
  CHECK(has(free, Group::Angle));
  CHECK(has(free, Group::Fairness));
  CHECK_FALSE(has(free, Group::CurveClose));
  cfg.boundary_curve = {Vec3(-1, -1, 0), Vec3(3, -1, 0)};
  CHECK(has(assemble_energy(s, WebKind::CRPC, 0.0, cfg, cfg.weights), Group::CurveClose));
  try {
    assemble_energy(s, WebKind::Generic, 0.0, cfg, cfg.weights);
    FAIL("expected InconsistentRoles");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentRoles);
  }
  Net wrong = xy;
  wrong.kind = WebKind::GGG;
  wrong.roles = NetRoles::for_kind(WebKind::GGG);
  CHECK_THROWS_AS(init_aux_variables(wrong, WebKind::AAG), Error);
  wrong.kind = WebKind::AAG;
  CHECK_THROWS_AS(init_aux_variables(wrong, WebKind::AAG), Error);  // roles do not match kind
}

TEST_CASE("every constructor is a feasible start at eps = 0") {
  const SolverConfig crpc = [] {
    SolverConfig c = SolverConfig::for_kind(WebKind::CRPC);
    c.gamma = std::numbers::pi / 2;
    return c;
  }();
  auto e0 = [](const Net& net, WebKind k, const SolverConfig& c) { return initial_hard_energy(net, k, 0.0, c); };
  const SolverConfig none;
  CHECK(e0(recipes::ggg_pencil(12, 1.0 / 12, paraboloid), WebKind::GGG, none) <= 1e-8);
  CHECK(e0(recipes::ggg_cubic(13, 1.0, 1.1, 0.08, paraboloid), WebKind::GGG, none) <= 1e-8);
  CHECK(e0(recipes::aag_propagation(12, 0.15, [](double x, double y) { return x * y; }), WebKind::AAG, none) <= 1e-8);
  CHECK(e0(recipes::aag_koenigs(12, 0.15, 0.2, 7, [](double x, double y) { return 0.5 * x * y + 0.2 * x * x; }),
           WebKind::AAG, none) <= 1e-8);
  CHECK(e0(recipes::agag_conic(11, 11, -0.3, 0.3, 1.27, 1.87, [](double x, double y) { return 0.3 * (x * x + y * y); }),
           WebKind::AGAG, none) <= 1e-8);
  const TraceResult tr = trace_asymptotic_quadmesh(recipes::saddle_graph(2), Vec2(0.1, 0.1), 13, 13, 0.1, Vec2(0, 1));
  CHECK(e0(tr.net, WebKind::CRPC, crpc) <= 1e-8);
}

TEST_CASE("lm step basics") {
  // r = x - 3
  QuadraticConstraint c;
  c.lin = {{0, 1.0}};
  c.constant = -3;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
  double lambda = 1e-12;
  const LmStep st = lm_step(x, {c}, lambda);
  CHECK(x[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(st.energy_after < 1e-20);
  CHECK(lambda < 1e-12);
  // zero residual: no motion
  Eigen::VectorXd y = Eigen::VectorXd::Constant(1, 3.0);
  lambda = 1e-4;
  const LmStep z = lm_step(y, {c}, lambda);
  CHECK(y[0] == 3.0);
  CHECK(z.step_norm == 0);
  // x^2 + 1 near its minimum: small-damping steps overshoot, so a low cap on
  // the damping is exceeded
  QuadraticConstraint q;
  q.quad = {{0, 0, 1.0}};
  q.constant = 1;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 0.1);
  lambda = 1e-4;
  LmOptions capped;
  capped.lambda_max = 1e-3;
  try {
    lm_step(w, {q}, lambda, capped);
    FAIL("expected StallDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StallDetected);
  }
}

TEST_CASE("accepted steps never increase the energy") {
  Rng rng(21);
  const Net base = xy_grid(6, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    SolverState s = perturbed_state(base, WebKind::CRPC, rng, 0.05);
    SolverConfig cfg = SolverConfig::for_kind(WebKind::CRPC);
    cfg.gamma = rng.uniform(1.0, 2.0);
    const Constraints cs = assemble_energy(s, WebKind::CRPC, rng.uniform(0, 1), cfg, cfg.weights);
    const double before = energies(cs, s.x).total();
    double lambda = 1e-4;
    const LmStep st = lm_step(s.x, cs, lambda);
    CHECK(st.energy_after <= before);
    CHECK(energies(cs, s.x).total() == doctest::Approx(st.energy_after).epsilon(1e-10));
  }
}

TEST_CASE("noisy A-net is repaired within 20 iterations") {
  Rng rng(8);
  Net net = xy_grid(8, 0.25);
  const double h = net.mean_edge_length();
  for (int v = 0; v < net.size(); ++v) net.points().col(v) += 0.01 * h * rng.vec3();
  SolverState s = init_aux_variables(net, WebKind::CRPC);
  double lambda = 1e-4;
  double e = 1;
  for (int it = 0; it < 20 && e > 1e-5; ++it) {
    Constraints cs;
    build_anet_constraints(s, Stencil::Parameter, cs);
    build_vertex_closeness(s, {0, 1, 2, 8, 9}, 1e-3, cs);
    e = energies(cs, s.x).hard;
    if (e > 1e-5) lm_step(s.x, cs, lambda);
  }
  CHECK(e <= 1e-5);
}

TEST_CASE("continuation on a small GGG web") {
  const Net net = recipes::ggg_pencil(10, 0.1, paraboloid);
  const SolverConfig cfg = SolverConfig::for_kind(WebKind::GGG);
  const ContinuationResult r = run_continuation(net, WebKind::GGG, cfg);
  CHECK(r.converged);
  CHECK(r.final_e_hard <= 1e-5);
  REQUIRE(r.per_eps.size() == 5);
  CHECK(r.per_eps[0].iterations == 0);
  for (const auto& p : r.per_eps) CHECK(p.iterations <= 20);
  for (const auto& it : r.iterations) CHECK(it.e_hard >= 0);
  // the result is a Euclidean GGG web: every geodesic family passes the Euclidean test loosely
  CHECK(r.net.kind == WebKind::GGG);
  // determinism
  const ContinuationResult again = run_continuation(net, WebKind::GGG, cfg);
  CHECK((again.net.points() - r.net.points()).norm() == 0);
  REQUIRE(again.iterations.size() == r.iterations.size());
  for (size_t k = 0; k < r.iterations.size(); ++k) CHECK(again.iterations[k].e_hard == r.iterations[k].e_hard);
  const auto js = stats_to_json(r, cfg);
  CHECK(js["V"] == 121);
  CHECK(js["Nv"].get<int>() == r.state.num_vars());
  CHECK(js["perEps"].size() == 5);
}

TEST_CASE("already exact input needs no iterations") {
  // a plane with a straight-line web is a web of geodesics in every metric
  const Net net = recipes::ggg_pencil(6, 0.2, [](double, double) { return 0.0; });
  const ContinuationResult r = run_continuation(net, WebKind::GGG, SolverConfig::for_kind(WebKind::GGG));
  CHECK(r.converged);
  for (const auto& p : r.per_eps) CHECK(p.iterations <= 1);
}

TEST_CASE("solver config JSON and validation") {
  SolverConfig c = SolverConfig::for_kind(WebKind::AGAG);
  CHECK(c.weights.fairness == 1e-2);
  c.flat_points = {Vec2(0.5, -0.25)};
  c.flat_radius = 0.2;
  c.gamma = std::numbers::pi / 3;
  const SolverConfig back = config_from_json(config_to_json(c, WebKind::AGAG), WebKind::AGAG);
  CHECK(back.eps_schedule == c.eps_schedule);
  CHECK(back.weights.vert_close == c.weights.vert_close);
  CHECK(back.gamma == doctest::Approx(c.gamma).epsilon(1e-15));
  CHECK(back.flat_points.size() == 1);
  CHECK(back.lm.lambda_max == 1e6);
  CHECK(default_weights(WebKind::GGG).surf_close == 1e-3);
  CHECK(default_weights(WebKind::AAG).fairness == 5e-3);
  CHECK(default_weights(WebKind::CRPC).vert_close == 5e-3);
  const Net net = recipes::ggg_pencil(4, 0.25, paraboloid);
  for (auto bad : {std::vector<double>{0, 0.5}, std::vector<double>{0, 0.7, 0.5, 1}, std::vector<double>{}}) {
    SolverConfig b;
    b.eps_schedule = bad;
    CHECK_THROWS_AS(run_continuation(net, WebKind::GGG, b), Error);
  }
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"weights", {{"fairness", "x"}}}}, WebKind::GGG), Error);
}
