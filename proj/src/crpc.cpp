#include "isoweb/crpc.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace isoweb {

// --- polynomials ---

ComplexPoly::ComplexPoly(std::vector<cplx> c) : c_(std::move(c)) {
  while (!c_.empty() && c_.back() == cplx(0)) c_.pop_back();
}

cplx ComplexPoly::operator()(cplx w) const {
  cplx acc = 0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * w + *it;
  return acc;
}

ComplexPoly ComplexPoly::derivative() const {
  std::vector<cplx> d;
  for (size_t k = 1; k < c_.size(); ++k) d.push_back(static_cast<double>(k) * c_[k]);
  return ComplexPoly(std::move(d));
}

ComplexPoly ComplexPoly::antiderivative() const {
  if (c_.empty()) return {};
  std::vector<cplx> a(c_.size() + 1, 0.0);
  for (size_t k = 0; k < c_.size(); ++k) a[k + 1] = c_[k] / static_cast<double>(k + 1);
  return ComplexPoly(std::move(a));
}

ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b) {
  if (a.c_.empty() || b.c_.empty()) return {};
  std::vector<cplx> p(a.c_.size() + b.c_.size() - 1, 0.0);
  for (size_t i = 0; i < a.c_.size(); ++i)
    for (size_t j = 0; j < b.c_.size(); ++j) p[i + j] += a.c_[i] * b.c_[j];
  return ComplexPoly(std::move(p));
}

ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b) {
  std::vector<cplx> s(std::max(a.c_.size(), b.c_.size()), 0.0);
  for (size_t k = 0; k < s.size(); ++k) s[k] = a[static_cast<int>(k)] + b[static_cast<int>(k)];
  return ComplexPoly(std::move(s));
}

// --- ansatz ---

namespace {

ComplexPoly flat_factor(const std::vector<cplx>& flat_points) {
  ComplexPoly p = ComplexPoly::constant(1.0);
  for (cplx r : flat_points) p = p * ComplexPoly::monomial_root(r);
  return p;
}

void check_gamma(double gamma) {
  if (!(gamma > 0) || gamma > std::numbers::pi / 2 + 1e-15)
    throw Error(ErrorCode::InvalidInput, "gamma must lie in (0, pi/2]");
}

}  // namespace

CrpcAnsatz build_c2l(double gamma, const std::vector<cplx>& flat_points) {
  check_gamma(gamma);
  CrpcAnsatz a;
  a.gamma = gamma;
  a.eps = gamma == std::numbers::pi / 2 ? 0.0 : std::cos(gamma);
  a.flat_points = flat_points;
  const ComplexPoly hp = flat_factor(flat_points);
  a.h = hp.antiderivative();
  a.g = (hp * hp).antiderivative().antiderivative();
  return a;
}

CrpcAnsatz boundary_ansatz(double gamma, const std::vector<cplx>& flat_points, const std::vector<cplx>& hk, cplx g0,
                           cplx g1) {
  check_gamma(gamma);
  CrpcAnsatz a;
  a.gamma = gamma;
  a.eps = gamma == std::numbers::pi / 2 ? 0.0 : std::cos(gamma);
  a.flat_points = flat_points;
  const ComplexPoly hp = flat_factor(flat_points) * ComplexPoly(hk);
  a.h = hp.antiderivative();
  a.g = (hp * hp).antiderivative().antiderivative() + ComplexPoly({g0, g1});
  return a;
}

double eval_ansatz(const CrpcAnsatz& a, cplx w) { return eval_ansatz(a, w, a.eps); }

double eval_ansatz(const CrpcAnsatz& a, cplx w, double eps) {
  double f = 2 * a.g(w).real();
  if (eps == 0) return f;
  const cplx h = a.h(w);
  f += eps * std::norm(h);
  f += eps * eps * (h * h).real() * std::log(std::abs(a.h.derivative()(w)) + eps);
  return f;
}

nlohmann::json ansatz_to_json(const CrpcAnsatz& a) {
  auto arr = [](const std::vector<cplx>& v) {
    nlohmann::json out = nlohmann::json::array();
    for (cplx c : v) out.push_back({c.real(), c.imag()});
    return out;
  };
  return {{"gamma", a.gamma}, {"flatPoints", arr(a.flat_points)}, {"hCoeffs", arr(a.h.coeffs())},
          {"gCoeffs", arr(a.g.coeffs())}};
}

CrpcAnsatz ansatz_from_json(const nlohmann::json& j) {
  try {
    auto arr = [](const nlohmann::json& v) {
      std::vector<cplx> out;
      for (const auto& c : v) out.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      return out;
    };
    CrpcAnsatz a;
    a.gamma = j.at("gamma").get<double>();
    check_gamma(a.gamma);
    a.eps = a.gamma == std::numbers::pi / 2 ? 0.0 : std::cos(a.gamma);
    a.flat_points = arr(j.at("flatPoints"));
    a.h = ComplexPoly(arr(j.at("hCoeffs")));
    a.g = ComplexPoly(arr(j.at("gCoeffs")));
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("ansatz JSON: ") + e.what());
  }
}

// --- PDE residual ---

double crpc_pde_residual(const std::function<double(double, double)>& f, double eps, cplx w, double step) {
  const double x = w.real(), y = w.imag(), h = step;
  const double f0 = f(x, y);
  const double fxx = (f(x + h, y) - 2 * f0 + f(x - h, y)) / (h * h);
  const double fyy = (f(x, y + h) - 2 * f0 + f(x, y - h)) / (h * h);
  const double fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
  const double fwwbar = (fxx + fyy) / 4;
  const double fww = std::abs(cplx(fxx - fyy, -2 * fxy)) / 4;
  // sign of the square root chosen per point
  return std::abs(std::abs(fwwbar) - eps * fww);
}

PdeResidual crpc_pde_residual(const CrpcAnsatz& a, cplx w, double step, std::optional<double> eps) {
  const double e = eps.value_or(a.eps);
  PdeResidual r;
  r.value = crpc_pde_residual([&](double x, double y) { return eval_ansatz(a, {x, y}, e); }, e, w, step);
  r.near_flat = std::abs(a.h.derivative()(w)) < e;
  return r;
}

double crpc_residual_order(const CrpcAnsatz& a, const std::vector<cplx>& points, const std::vector<double>& eps_values,
                           double step) {
  if (points.empty() || eps_values.size() < 2) throw Error(ErrorCode::InvalidInput, "need points and two eps values");
  double xm = 0;
  for (double e : eps_values) xm += std::log(e);
  xm /= static_cast<double>(eps_values.size());
  double sxy = 0, sxx = 0;
  for (cplx w : points) {
    std::vector<double> ys;
    for (double e : eps_values) ys.push_back(std::log(crpc_pde_residual(a, w, step, e).value));
    double ym = 0;
    for (double y : ys) ym += y;
    ym /= static_cast<double>(ys.size());
    for (size_t k = 0; k < ys.size(); ++k) {
      const double dx = std::log(eps_values[k]) - xm;
      sxy += dx * (ys[k] - ym);
      sxx += dx * dx;
    }
  }
  return sxy / sxx;
}

// --- boundary fit ---

namespace {

CrpcAnsatz unpack(const Eigen::VectorXd& p, int k, double gamma, const std::vector<cplx>& flats) {
  std::vector<cplx> hk;
  for (int m = 0; m <= k; ++m) hk.emplace_back(p(2 * m), p(2 * m + 1));
  const int o = 2 * (k + 1);
  return boundary_ansatz(gamma, flats, hk, cplx(p(o), 0.0), cplx(p(o + 1), p(o + 2)));
}

Eigen::VectorXd fit_residuals(const Eigen::VectorXd& p, int k, double gamma, const std::vector<cplx>& flats,
                              const BoundarySpec& spec) {
  const CrpcAnsatz a = unpack(p, k, gamma, flats);
  Eigen::VectorXd r(static_cast<int>(spec.polygon.size()));
  for (size_t s = 0; s < spec.polygon.size(); ++s)
    r(s) = eval_ansatz(a, {spec.polygon[s].x(), spec.polygon[s].y()}) - spec.heights[s];
  return r;
}

}  // namespace

BoundaryFit fit_boundary(const BoundarySpec& spec, double gamma, const std::vector<cplx>& flat_points, int k,
                         int max_iter, double misfit_tol) {
  if (k < 0) throw Error(ErrorCode::InvalidInput, "fit degree must be >= 0");
  if (spec.polygon.size() != spec.heights.size())
    throw Error(ErrorCode::InvalidInput, "boundary polygon and heights differ in length");
  if (static_cast<int>(spec.polygon.size()) < 2 * k + 6)
    throw Error(ErrorCode::InvalidInput, "need at least 2k+6 boundary samples");
  const int np = 2 * (k + 1) + 3;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(np);
  p(0) = 1.0;
  double bmax = 0, bmean = 0;
  for (double b : spec.heights) bmax = std::max(bmax, std::abs(b)), bmean += b;
  p(2 * (k + 1)) = 0.5 * bmean / static_cast<double>(spec.heights.size());

  Eigen::VectorXd r = fit_residuals(p, k, gamma, flat_points, spec);
  double E = r.squaredNorm(), lambda = 1e-3;
  int it = 0;
  for (; it < max_iter && E > 0; ++it) {
    Eigen::MatrixXd J(r.size(), np);
    for (int m = 0; m < np; ++m) {
      const double d = 1e-6 * std::max(1.0, std::abs(p(m)));
      Eigen::VectorXd pp = p, pm = p;
      pp(m) += d;
      pm(m) -= d;
      J.col(m) = (fit_residuals(pp, k, gamma, flat_points, spec) - fit_residuals(pm, k, gamma, flat_points, spec)) / (2 * d);
    }
    const Eigen::MatrixXd A = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    while (lambda < 1e12) {
      const Eigen::VectorXd delta =
          (A + lambda * Eigen::MatrixXd::Identity(np, np)).ldlt().solve(-g);
      const Eigen::VectorXd pn = p + delta;
      const Eigen::VectorXd rn = fit_residuals(pn, k, gamma, flat_points, spec);
      const double En = rn.squaredNorm();
      if (std::isfinite(En) && En < E) {
        const double drop = E - En;
        p = pn, r = rn, E = En;
        lambda *= 0.5;
        accepted = true;
        if (drop <= 1e-15 * E || delta.norm() <= 1e-14 * (1 + p.norm())) it = max_iter;  // stationary
        break;
      }
      lambda *= 4;
    }
    if (!accepted) break;
  }
  BoundaryFit out;
  out.ansatz = unpack(p, k, gamma, flat_points);
  out.misfit = std::sqrt(E / static_cast<double>(r.size()));
  out.iterations = std::min(it, max_iter);
  out.converged = out.misfit <= misfit_tol * std::max(1.0, bmax);
  return out;
}

// --- height fields ---

Eigen::Matrix2d GraphSample::hessian(double x, double y) const {
  if (hessian_fn) return hessian_fn(x, y);
  const double h = fd_step;
  const double f0 = f(x, y);
  Eigen::Matrix2d H;
  H(0, 0) = (f(x + h, y) - 2 * f0 + f(x - h, y)) / (h * h);
  H(1, 1) = (f(x, y + h) - 2 * f0 + f(x, y - h)) / (h * h);
  H(0, 1) = H(1, 0) = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h);
  return H;
}

Net GraphSample::grid(int nx, int ny) const {
  if (nx < 2 || ny < 2) throw Error(ErrorCode::InvalidInput, "grid needs at least 2x2 samples");
  Net net(nx, ny);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = x0 + (x1 - x0) * i / (nx - 1), y = y0 + (y1 - y0) * j / (ny - 1);
      net(i, j) = Vec3(x, y, f(x, y));
    }
  return net;
}

GraphSample sample_ansatz(const CrpcAnsatz& a, double x0, double x1, double y0, double y1) {
  GraphSample s;
  s.f = [a](double x, double y) { return eval_ansatz(a, {x, y}); };
  s.x0 = x0, s.x1 = x1, s.y0 = y0, s.y1 = y1;
  return s;
}

std::array<Vec2, 2> asymptotic_directions(const GraphSample& s, const Vec2& p, double flat_tol) {
  const Eigen::Matrix2d H = s.hessian(p.x(), p.y());
  if (H.norm() < flat_tol) throw Error(ErrorCode::FlatPoint, "vanishing Hessian at the query point");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
  const double l_neg = es.eigenvalues()(0), l_pos = es.eigenvalues()(1);
  if (l_neg * l_pos > 0 || l_neg >= 0 || l_pos <= 0) {
    if (std::max(std::abs(l_neg), std::abs(l_pos)) < flat_tol) throw Error(ErrorCode::FlatPoint, "flat point");
    throw Error(ErrorCode::EllipticPoint, "Hessian is not indefinite");
  }
  const Vec2 e_pos = es.eigenvectors().col(1), e_neg = es.eigenvectors().col(0);
  const Vec2 a = std::sqrt(-l_neg) * e_pos, b = std::sqrt(l_pos) * e_neg;
  return {(a + b).normalized(), (a - b).normalized()};
}

// --- tracing ---

namespace {

Vec2 pick_direction(const GraphSample& s, const Vec2& q, const Vec2& ref) {
  std::array<Vec2, 2> d;
  try {
    d = asymptotic_directions(s, q);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FlatPoint) throw Error(ErrorCode::CrossedFlatPoint, "asymptotic line reached a flat point");
    throw;
  }
  Vec2 v = std::abs(d[0].dot(ref)) >= std::abs(d[1].dot(ref)) ? d[0] : d[1];
  return v.dot(ref) < 0 ? Vec2(-v) : v;
}

struct FlowEnd {
  Vec2 p, dir;
};

// RK4 along the field aligned with ref over signed arc length len in n steps.
FlowEnd flow(const GraphSample& s, Vec2 p, Vec2 ref, double len, int n) {
  const double sign = len < 0 ? -1.0 : 1.0;
  Vec2 dir = sign * ref;
  const double h = std::abs(len) / n;
  for (int k = 0; k < n; ++k) {
    const Vec2 k1 = pick_direction(s, p, dir);
    const Vec2 k2 = pick_direction(s, p + 0.5 * h * k1, k1);
    const Vec2 k3 = pick_direction(s, p + 0.5 * h * k2, k2);
    const Vec2 k4 = pick_direction(s, p + h * k3, k3);
    p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    dir = k4;
  }
  dir = pick_direction(s, p, dir);
  return {p, sign * dir};
}

}  // namespace

TraceResult trace_asymptotic_quadmesh(const GraphSample& s, const Vec2& seed, int rows, int cols, double step,
                                      const Vec2& first_dir) {
  if (rows < 2 || cols < 2 || !(step > 0)) throw Error(ErrorCode::InvalidInput, "trace needs rows, cols >= 2 and step > 0");
  if (!s.contains(seed)) throw Error(ErrorCode::InvalidInput, "seed outside the sample domain");
  const auto d = asymptotic_directions(s, seed);
  Vec2 field1 = std::abs(d[0].dot(first_dir)) >= std::abs(d[1].dot(first_dir)) ? d[0] : d[1];
  Vec2 field2 = field1 == d[0] ? d[1] : d[0];
  if (field1.dot(first_dir) < 0) field1 = -field1;
  if (cross2(field1, field2) < 0) field2 = -field2;

  const int sub = 8;
  std::vector<Vec2> P(static_cast<size_t>(rows * cols));
  std::vector<char> ok(P.size(), 0);
  auto at = [&](int i, int j) -> Vec2& { return P[i * cols + j]; };
  auto valid = [&](int i, int j) { return ok[i * cols + j] != 0; };
  auto mark = [&](int i, int j) { ok[i * cols + j] = s.contains(at(i, j)); };

  at(0, 0) = seed;
  mark(0, 0);
  auto march = [&](int i, int j, int pi, int pj, int ppi, int ppj, const Vec2& fallback) {
    if (!valid(pi, pj)) return;
    const Vec2 ref = (ppi >= 0 && ppj >= 0) ? Vec2((at(pi, pj) - at(ppi, ppj)).normalized()) : fallback;
    try {
      at(i, j) = flow(s, at(pi, pj), ref, step, sub).p;
      mark(i, j);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CrossedFlatPoint) throw;
    }
  };
  for (int j = 1; j < cols; ++j) march(0, j, 0, j - 1, j >= 2 ? 0 : -1, j - 2, field1);
  for (int i = 1; i < rows; ++i) march(i, 0, i - 1, 0, i >= 2 ? i - 2 : -1, 0, field2);

  for (int i = 1; i < rows; ++i)
    for (int j = 1; j < cols; ++j) {
      if (!valid(i, j - 1) || !valid(i - 1, j) || !valid(i - 1, j - 1)) continue;
      const Vec2 a = at(i, j - 1), b = at(i - 1, j), c = at(i - 1, j - 1);
      const Vec2 ref1 = (j >= 2 && valid(i, j - 2) ? Vec2(a - at(i, j - 2)) : Vec2(b - c)).normalized();
      const Vec2 ref2 = (i >= 2 && valid(i - 2, j) ? Vec2(b - at(i - 2, j)) : Vec2(a - c)).normalized();
      double sl = (b - c).norm(), tl = (a - c).norm();
      const int n1 = std::max(1, static_cast<int>(std::ceil(sl * sub / step)));
      const int n2 = std::max(1, static_cast<int>(std::ceil(tl * sub / step)));
      try {
        // the direction field carries differencing noise, so iterate to a
        // step-relative gap and keep the best iterate
        double best = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 40; ++it) {
          const FlowEnd e1 = flow(s, a, ref1, sl, n1), e2 = flow(s, b, ref2, tl, n2);
          const Vec2 gap = e1.p - e2.p;
          if (gap.norm() < best) best = gap.norm(), at(i, j) = 0.5 * (e1.p + e2.p);
          if (best <= 1e-11 * step) break;
          Eigen::Matrix2d M;
          M.col(0) = e1.dir;
          M.col(1) = -e2.dir;
          if (std::abs(M.determinant()) < 1e-12) break;
          Vec2 delta = M.partialPivLu().solve(-gap);
          const double cap = 0.5 * step;
          if (delta.norm() > cap) delta *= cap / delta.norm();
          sl += delta.x();
          tl += delta.y();
        }
        const bool done = best <= 1e-8 * step;
        if (done) mark(i, j);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::CrossedFlatPoint) throw;
      }
    }

  // largest valid index rectangle anchored at the seed
  std::vector<int> run(rows, 0);
  for (int i = 0; i < rows; ++i)
    while (run[i] < cols && valid(i, run[i])) ++run[i];
  int best_r = 1, best_c = run[0], width = run[0];
  for (int r = 1; r <= rows; ++r) {
    width = std::min(width, run[r - 1]);
    if (width >= 1 && r * width > best_r * best_c) best_r = r, best_c = width;
  }
  TraceResult out;
  out.left_domain = best_r < rows || best_c < cols;
  if (best_r < 2 || best_c < 2) throw Error(ErrorCode::InvalidInput, "traced region collapsed near the seed");
  out.net = Net(best_r, best_c);
  for (int i = 0; i < best_r; ++i)
    for (int j = 0; j < best_c; ++j) {
      const Vec2 q = at(i, j);
      out.net(i, j) = Vec3(q.x(), q.y(), s(q.x(), q.y()));
    }
  out.net.kind = WebKind::CRPC;
  out.net.roles = NetRoles::for_kind(WebKind::CRPC);
  out.anet_residual = anet_residual(out.net, Stencil::Parameter);
  return out;
}

}  // namespace isoweb
