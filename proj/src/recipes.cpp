#include "isoweb/recipes.hpp"

#include <random>

namespace isoweb::recipes {

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(n == 1 ? a : a + (b - a) * k / (n - 1));
  return out;
}

Vec2 point_on(const Line2& l, double x) { return {x, (l.c - l.a * x) / l.b}; }

}  // namespace

Net ggg_pencil(int n, double h, const HeightFn& phi) { return lift_to_graph(pencil_line_web(n, h), phi); }

Net ggg_cubic(int count, double u0, double v0, double du, const HeightFn& phi) {
  return lift_to_graph(cubic_tangent_web(linspace(u0, u0 + (count - 1) * du, count),
                                         linspace(v0, v0 + (count - 1) * du, count)),
                       phi);
}

Net aag_propagation(int n, double h, const HeightFn& phi) {
  AagSeed seed;
  for (int l = 0; l <= 2 * n; ++l) seed.lines.push_back(Line2::from_slope(1.0, (n - l) * h));
  for (int k = 0; k <= n; ++k) seed.diagonal.emplace_back(k * h, k * h, phi(k * h, k * h));
  for (int k = 0; k <= n + 1; ++k) seed.subdiagonal.emplace_back(k * h, (k - 1) * h, phi(k * h, (k - 1) * h));
  return aag_propagate(seed);
}

Net aag_koenigs(int n, double h, double jitter, unsigned rng_seed, const HeightFn& phi) {
  std::mt19937_64 gen(rng_seed);
  std::uniform_real_distribution<double> u(-1, 1);
  KoenigsSeed seed;
  for (int l = 0; l <= 2 * n; ++l)
    seed.lines.push_back(Line2::from_slope(1 + 0.05 * jitter * u(gen), (n - l + 0.1 * jitter * u(gen)) * h));
  auto at = [&](int i, int j) { return point_on(seed.lines[n + i - j], (i + 0.1 * jitter * u(gen)) * h); };
  for (int k = 0; k <= n; ++k) seed.boundary.push_back(at(0, n - k));
  for (int k = 1; k <= n; ++k) seed.boundary.push_back(at(k, 0));
  for (int i = 1; i <= n; ++i) seed.diagonal.push_back(at(i, i));
  for (int i = 1; i < n; ++i) seed.superdiagonal.push_back(at(i, i + 1));
  return aag_from_koenigs(koenigs_propagate(seed), phi);
}

Net agag_conic(int rows, int cols, double t0, double t1, double p0, double p1, const HeightFn& phi) {
  const GNet g = conic_tangent_gnet(linspace(t0, t1, rows), linspace(p0, p1, cols));
  const Net ref = fit_lift(g.net, {Stencil::DiagonalEven, Stencil::DiagonalOdd}, phi);
  return build_agag(g.net, side_anchors(ref));
}

TraceResult crpc_ansatz_trace(const CrpcAnsatz& a, double height_scale, const Vec2& seed, int rows, int cols,
                              double step, const Vec2& first_dir) {
  GraphSample g;
  g.f = [a, height_scale](double x, double y) { return height_scale * eval_ansatz(a, {x, y}); };
  const double r = std::abs(seed.x()) + std::abs(seed.y()) + step * (rows + cols) + 1;
  g.x0 = g.y0 = -r;
  g.x1 = g.y1 = r;
  return trace_asymptotic_quadmesh(g, seed, rows, cols, step, first_dir);
}

Net reverse_j(const Net& net) {
  Net out = net;
  for (int i = 0; i < net.rows(); ++i)
    for (int j = 0; j < net.cols(); ++j) out(i, j) = net(i, net.cols() - 1 - j);
  return out;
}

Net random_qnet(int rows, int cols, unsigned rng_seed) {
  std::mt19937_64 gen(rng_seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Net net(rows, cols);
  for (int i = 0; i < rows; ++i) net(i, 0) = Vec3(i + 0.2 * u(gen), 0.2 * u(gen), 0.5 * u(gen));
  for (int j = 1; j < cols; ++j) net(0, j) = Vec3(0.2 * u(gen), j + 0.2 * u(gen), 0.5 * u(gen));
  for (int i = 1; i < rows; ++i)
    for (int j = 1; j < cols; ++j) {
      const Vec3 o = net(i - 1, j - 1), a = net(i, j - 1) - o, b = net(i - 1, j) - o;
      const double s = 1 + 0.2 * u(gen), t = 1 + 0.2 * u(gen);
      net(i, j) = o + s * a + t * b;
    }
  return net;
}

GraphSample saddle_graph(double r) {
  GraphSample s;
  s.f = [](double x, double y) { return x * y; };
  s.x0 = s.y0 = -r;
  s.x1 = s.y1 = r;
  s.hessian_fn = [](double, double) { return Eigen::Matrix2d{{0, 1}, {1, 0}}; };
  return s;
}

}  // namespace isoweb::recipes
