#pragma once

#include <array>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "isoweb/net.hpp"
#include "json.hpp"

namespace isoweb {

using cplx = std::complex<double>;

/// Polynomial c_0 + c_1 w + ... with complex coefficients. Trailing zeros are
/// trimmed, the zero polynomial has no coefficients.
class ComplexPoly {
 public:
  ComplexPoly() = default;
  explicit ComplexPoly(std::vector<cplx> c);
  static ComplexPoly constant(cplx c) { return ComplexPoly({c}); }
  static ComplexPoly monomial_root(cplx r) { return ComplexPoly({-r, 1.0}); }  // w - r

  const std::vector<cplx>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
  cplx operator[](int k) const { return k < static_cast<int>(c_.size()) ? c_[k] : cplx(0); }

  cplx operator()(cplx w) const;
  ComplexPoly derivative() const;
  ComplexPoly antiderivative() const;  // zero constant term

  friend ComplexPoly operator*(const ComplexPoly& a, const ComplexPoly& b);
  friend ComplexPoly operator+(const ComplexPoly& a, const ComplexPoly& b);

 private:
  std::vector<cplx> c_;
};

struct CrpcAnsatz {
  double gamma = std::numbers::pi / 2;
  double eps = 0;  // cos(gamma)
  std::vector<cplx> flat_points;
  ComplexPoly h, g;
};

/// h = integral of prod (w - w_i), g'' = h'^2 with zero integration constants.
CrpcAnsatz build_c2l(double gamma, const std::vector<cplx>& flat_points);

/// 2 Re g + eps |h|^2 + eps^2 Re(h^2) log(|h'| + eps).
double eval_ansatz(const CrpcAnsatz& a, cplx w);
double eval_ansatz(const CrpcAnsatz& a, cplx w, double eps);

nlohmann::json ansatz_to_json(const CrpcAnsatz& a);
CrpcAnsatz ansatz_from_json(const nlohmann::json& j);

/// | |f_{w wbar}| - eps |f_{ww}| | from central differences of f with the given step.
double crpc_pde_residual(const std::function<double(double, double)>& f, double eps, cplx w, double step);

struct PdeResidual {
  double value = 0;
  bool near_flat = false;  // |h'(w)| < eps
};

PdeResidual crpc_pde_residual(const CrpcAnsatz& a, cplx w, double step, std::optional<double> eps = {});

/// Log-log slope of the ansatz PDE residual against eps over the given points:
/// one common slope fitted with a separate intercept per point.
double crpc_residual_order(const CrpcAnsatz& a, const std::vector<cplx>& points, const std::vector<double>& eps_values,
                           double step);

// --- boundary fit ---

struct BoundarySpec {
  std::vector<Vec2> polygon;     // closed, last vertex not repeated
  std::vector<double> heights;   // b at polygon vertices
};

struct BoundaryFit {
  CrpcAnsatz ansatz;
  double misfit = 0;    // RMS of f - b over the samples
  int iterations = 0;
  bool converged = false;  // misfit within tolerance
};

/// h = integral of prod (w - w_i)(h_0 + ... + h_k w^k), g = double integral of
/// h'^2 + g_0 + g_1 w; coefficients fitted by Levenberg-Marquardt with Im g_0 = 0.
BoundaryFit fit_boundary(const BoundarySpec& spec, double gamma, const std::vector<cplx>& flat_points, int k,
                         int max_iter = 200, double misfit_tol = 1e-6);

/// Ansatz for the parametrization of fit_boundary (exposed for tests).
CrpcAnsatz boundary_ansatz(double gamma, const std::vector<cplx>& flat_points, const std::vector<cplx>& hk, cplx g0,
                           cplx g1);

// --- height fields and asymptotic tracing ---

struct GraphSample {
  std::function<double(double, double)> f;
  double x0 = -1, x1 = 1, y0 = -1, y1 = 1;  // domain rectangle
  double fd_step = 1e-3;
  std::function<Eigen::Matrix2d(double, double)> hessian_fn;  // optional exact Hessian

  bool contains(const Vec2& p) const { return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1; }
  double operator()(double x, double y) const { return f(x, y); }
  Eigen::Matrix2d hessian(double x, double y) const;
  Net grid(int nx, int ny) const;  // height-field samples over the rectangle
};

GraphSample sample_ansatz(const CrpcAnsatz& a, double x0, double x1, double y0, double y1);

/// Solutions of f_xx dx^2 + 2 f_xy dx dy + f_yy dy^2 = 0, unit length.
/// Throws EllipticPoint or FlatPoint (Hessian norm below flat_tol).
std::array<Vec2, 2> asymptotic_directions(const GraphSample& s, const Vec2& p, double flat_tol = 1e-9);

struct TraceResult {
  Net net;
  bool left_domain = false;  // net clipped to the traced region
  double anet_residual = 0;
};

/// Quad net along the two asymptotic fields from seed. j advances along the
/// field closest to first_dir, i along the other one (right-handed).
TraceResult trace_asymptotic_quadmesh(const GraphSample& s, const Vec2& seed, int rows, int cols, double step,
                                      const Vec2& first_dir = Vec2(1, 0));

}  // namespace isoweb
