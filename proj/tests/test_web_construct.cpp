#include <cmath>
#include <numbers>

#include "doctest.h"
#include "isoweb/web_construct.hpp"
#include "test_util.hpp"

using namespace isoweb;
using testutil::Rng;

namespace {

bool on_line(const Line2& l, const Vec2& p, double tol = 1e-10) { return std::abs(l.signed_distance(p)) <= tol; }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(a + (b - a) * k / (n - 1));
  return out;
}

// D_l : y = x + (n - l), the diagonal lines of the integer grid
std::vector<Line2> grid_lines(int n) {
  std::vector<Line2> lines;
  for (int l = 0; l <= 2 * n; ++l) lines.push_back(Line2::from_slope(1.0, n - l));
  return lines;
}

AagSeed saddle_seed(int n) {
  AagSeed seed;
  seed.lines = grid_lines(n);
  for (int k = 0; k <= n; ++k) seed.diagonal.emplace_back(k, k, double(k) * k);
  for (int k = 0; k <= n + 1; ++k) seed.subdiagonal.emplace_back(k, k - 1, double(k) * (k - 1));
  return seed;
}

Vec2 point_on(const Line2& l, double x) { return {x, (l.c - l.a * x) / l.b}; }

AagSeed random_aag_seed(Rng& rng, int n) {
  AagSeed seed;
  for (int l = 0; l <= 2 * n; ++l) seed.lines.push_back(Line2::from_slope(1 + 0.05 * rng.uniform(), n - l + 0.1 * rng.uniform()));
  for (int k = 0; k <= n; ++k) {
    const Vec2 p = point_on(seed.lines[n], k + 0.1 * rng.uniform());
    seed.diagonal.emplace_back(p.x(), p.y(), p.x() * p.y() + 0.05 * rng.uniform());
  }
  for (int k = 0; k <= n + 1; ++k) {
    const Vec2 p = point_on(seed.lines[n + 1], k + 0.1 * rng.uniform());
    seed.subdiagonal.emplace_back(p.x(), p.y(), p.x() * p.y() + 0.05 * rng.uniform());
  }
  return seed;
}

KoenigsSeed koenigs_seed(int n, Rng* rng) {
  KoenigsSeed seed;
  auto jitter = [&](double s) { return rng ? s * rng->uniform() : 0.0; };
  for (int l = 0; l <= 2 * n; ++l) seed.lines.push_back(Line2::from_slope(1 + jitter(0.05), n - l + jitter(0.1)));
  auto at = [&](int i, int j) { return point_on(seed.lines[n + i - j], i + jitter(0.1)); };
  for (int k = 0; k <= n; ++k) seed.boundary.push_back(at(0, n - k));
  for (int k = 1; k <= n; ++k) seed.boundary.push_back(at(k, 0));
  for (int i = 1; i <= n; ++i) seed.diagonal.push_back(at(i, i));
  for (int i = 1; i < n; ++i) seed.superdiagonal.push_back(at(i, i + 1));
  return seed;
}

}  // namespace

TEST_CASE("cubic tangent web vertices and diagonals") {
  const LineWeb web = cubic_tangent_web({1, 2, 3}, {4, 5, 6});
  const LineWeb small = cubic_tangent_web({1}, {2});
  CHECK(small.vertex(0, 0).x() == doctest::Approx(7.0 / 9).epsilon(1e-15));
  CHECK(small.vertex(0, 0).y() == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // tangent at s = -(1 + 2) passes through the same point
  CHECK(on_line(Line2{-9, 27, 2}, small.vertex(0, 0), 1e-14));
  REQUIRE(web.has_diagonals());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Vec2 p = web.vertex(i, j);
      CHECK(on_line(web.i_lines.lines[i], p));
      CHECK(on_line(web.j_lines.lines[j], p));
      CHECK(on_line(web.diagonals.lines[web.diagonal_index(i, j)], p));
    }
  CHECK_THROWS_AS(cubic_tangent_web({1, 2}, {-1, 3}), Error);
  try {
    cubic_tangent_web({1}, {-1});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateParameters);
  }
  CHECK_FALSE(cubic_tangent_web({1, 2, 4}, {5, 6}).has_diagonals());
}

TEST_CASE("pencil web and graph lift") {
  const LineWeb web = pencil_line_web(4, 0.5);
  CHECK(web.vertices.size() == 25);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) CHECK(on_line(web.diagonals.lines[web.diagonal_index(i, j)], web.vertex(i, j), 1e-15));
  const Net net = lift_to_graph(web, [](double x, double y) { return std::sin(x) * y + x * x; });
  CHECK(net.kind == WebKind::GGG);
  CHECK_NOTHROW(net.check_roles());
  // after reversing j the diagonal x + y = const becomes an (i - j)-line
  for (const auto& poly : family_polylines(net, Family::DiagMinus))
    for (const auto& v : poly.verts) CHECK(net(v.i, v.j).x() + net(v.i, v.j).y() == doctest::Approx(net(poly.verts[0].i, poly.verts[0].j).x() + net(poly.verts[0].i, poly.verts[0].j).y()));
  for (Family f : {Family::ILines, Family::JLines, Family::DiagMinus})
    for (const auto& poly : family_polylines(net, f)) CHECK(geodesic_residual(net, poly, 0.0) <= 1e-12);
}

TEST_CASE("AAG propagation reproduces the saddle z = xy") {
  for (int n : {1, 2, 5, 12, 19}) {
    const Net net = aag_propagate(saddle_seed(n));
    double err = 0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) err = std::max(err, (net(i, j) - Vec3(i, j, double(i) * j)).norm());
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("AAG propagation property: random seeds give A-nets on the prescribed lines") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.integer(2, 7);
    const AagSeed seed = random_aag_seed(rng, n);
    const Net net = aag_propagate(seed);
    CHECK(anet_residual(net, Stencil::Parameter) <= 1e-9);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) CHECK(on_line(seed.lines[n + i - j], net.xy(i, j), 1e-9));
  }
}

TEST_CASE("AAG propagation rejects planar and off-line seeds") {
  AagSeed seed = saddle_seed(3);
  for (auto& p : seed.diagonal) p.z() = p.x() + 2 * p.y();
  for (auto& p : seed.subdiagonal) p.z() = p.x() + 2 * p.y();
  try {
    aag_propagate(seed);
    FAIL("expected SingularStep");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularStep);
  }
  seed = saddle_seed(3);
  seed.diagonal[1].x() += 0.1;
  try {
    aag_propagate(seed);
    FAIL("expected SeedOffLine");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SeedOffLine);
  }
}

TEST_CASE("Koenigs propagation on the integer grid") {
  const int n = 4;
  const KoenigsData data = koenigs_propagate(koenigs_seed(n, nullptr));
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      CHECK((data.net.xy(i, j) - Vec2(i, j)).norm() <= 1e-12);
      CHECK(data.nu(i, j) == doctest::Approx(i % 2 ? -1.0 : 1.0).epsilon(1e-12));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK((data.diag_point(i, j) - Vec2(i + 0.5, j + 0.5)).norm() <= 1e-12);
  CHECK(koenigs_residual(data.net, data.nu) <= 1e-12);
}

TEST_CASE("Koenigs propagation property: random seeds") {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.integer(1, 8);
    KoenigsSeed seed = koenigs_seed(n, &rng);
    seed.nu00 = rng.uniform(0.5, 2);
    seed.nu01 = rng.uniform(0.5, 2);
    const KoenigsData data = koenigs_propagate(seed);
    CHECK(koenigs_residual(data.net, data.nu) <= 1e-10);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) CHECK(on_line(seed.lines[n + i - j], data.net.xy(i, j), 1e-9));
  }
  KoenigsSeed seed = koenigs_seed(3, nullptr);
  seed.nu00 = 0;
  try {
    koenigs_propagate(seed);
    FAIL("expected ZeroMultiplier");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroMultiplier);
  }
}

TEST_CASE("A-net lifts over fixed top views") {
  const Net top = testutil::grid_net(6, 5, [](int i, int j) { return Vec3(i, j, 0); });
  // zero and affine anchors reproduce themselves
  std::vector<HeightAnchor> anchors = side_anchors(top);
  anchors.push_back({5, 4, 0});
  CHECK(solve_lift(top, anchors, {Stencil::Parameter}).net.points().row(2).cwiseAbs().maxCoeff() <= 1e-14);
  for (auto& a : anchors) a.z = 2 + a.i - 3 * a.j;
  LiftResult affine = solve_lift(top, anchors, {Stencil::Parameter});
  CHECK(affine.trivial);
  CHECK(affine.residual <= 1e-12);

  // the two sides leave the bilinear term free
  const Net saddle = testutil::grid_net(6, 5, [](int i, int j) { return Vec3(i, j, double(i) * j); });
  try {
    anet_lift(top, side_anchors(saddle));
    FAIL("expected ZeroPivot");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPivot);
  }
  anchors = side_anchors(saddle);
  anchors.push_back({5, 4, 20});
  const Net lifted = anet_lift(top, anchors);
  CHECK((lifted.points() - saddle.points()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(lifted.roles.i_lines == LineRole::Asymptotic);

  // linear in the anchor heights
  Rng rng(3);
  std::vector<HeightAnchor> a1 = anchors, a2 = anchors, a3 = anchors;
  for (size_t k = 0; k < anchors.size(); ++k) {
    a1[k].z = rng.uniform();
    a2[k].z = rng.uniform();
    a3[k].z = 2 * a1[k].z - 0.5 * a2[k].z;
  }
  const Eigen::VectorXd lin = 2 * anet_lift(top, a1).points().row(2) - 0.5 * anet_lift(top, a2).points().row(2);
  CHECK((anet_lift(top, a3).points().row(2).transpose() - lin).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("A-net lift recovers a propagated AAG net from its top view") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(3, 7);
    const Net aag = aag_propagate(random_aag_seed(rng, n));
    Net top = aag;
    top.points().row(2).setZero();
    auto anchors = side_anchors(aag);
    anchors.push_back({n, n, aag(n, n).z()});
    const LiftResult res = solve_lift(top, anchors, {Stencil::Parameter});
    CHECK(res.residual <= 1e-9);
    CHECK((res.net.points() - aag.points()).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("AAG nets from Koenigs top views") {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.integer(3, 8);
    const KoenigsData data = koenigs_propagate(koenigs_seed(n, &rng));
    const Net net = aag_from_koenigs(data, [](double x, double y) { return x * y; });
    CHECK(anet_residual(net, Stencil::Parameter) <= 1e-8);
    CHECK(net.kind == WebKind::AAG);
  }
}

TEST_CASE("conic tangent G-nets") {
  const GNet one = conic_tangent_gnet({0}, {std::numbers::pi / 2});
  CHECK((one.net.xy(0, 0) - Vec2(1, 1)).norm() <= 1e-15);
  const GNet two = conic_tangent_gnet({0}, {2 * std::numbers::pi / 3});
  CHECK((two.net.xy(0, 0) - Vec2(1, std::sqrt(3.0))).norm() <= 1e-14);
  try {
    conic_tangent_gnet({0}, {std::numbers::pi});
    FAIL("expected ParallelTangents");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParallelTangents);
  }
}

TEST_CASE("AGAG lift over circle tangents and the two-conic control") {
  const auto th = linspace(0.2, 1.2, 9), ph = linspace(2.0, 3.0, 9);
  const GNet g = conic_tangent_gnet(th, ph);
  const auto target = [](double x, double y) { return 0.3 * (x * x + y * y); };
  const Net ref = fit_lift(g.net, {Stencil::DiagonalEven, Stencil::DiagonalOdd}, target);
  const Net agag = build_agag(g.net, side_anchors(ref));
  CHECK(anet_residual(agag, Stencil::DiagonalEven) <= 1e-8);
  CHECK(anet_residual(agag, Stencil::DiagonalOdd) <= 1e-8);
  CHECK((agag.points() - ref.points()).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_NOTHROW(agag.check_roles());

  LineFamily circle, ellipse;
  for (double t : th) circle.lines.push_back({std::cos(t), std::sin(t), 1.0});
  for (double p : ph) ellipse.lines.push_back({std::cos(p) / 2, std::sin(p), 1.0});
  const GNet mixed = tangent_line_gnet(circle, ellipse);
  // same boundary heights, top view swapped for the two-conic net
  const LiftResult res = solve_lift(mixed.net, side_anchors(ref), {Stencil::DiagonalEven, Stencil::DiagonalOdd});
  CHECK(res.residual >= 1e-3);
  CHECK(anet_residual(res.net, Stencil::DiagonalEven) >= 1e-3);
  try {
    build_agag(mixed.net, side_anchors(ref));
    FAIL("expected InconsistentLift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentLift);
  }
}
