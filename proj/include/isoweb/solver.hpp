#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "isoweb/net.hpp"
#include "json.hpp"

namespace isoweb {

// --- quadratic residuals ---

/// Affine form sum c_k x_{v_k} + c.
struct Affine {
  std::vector<std::pair<int, double>> terms;
  double c = 0;
};
using AffineVec3 = std::array<Affine, 3>;

AffineVec3 var3(int offset);            // (x_o, x_{o+1}, x_{o+2})
AffineVec3 const3(const Vec3& v);
AffineVec3 operator+(const AffineVec3& a, const AffineVec3& b);
AffineVec3 operator-(const AffineVec3& a, const AffineVec3& b);
AffineVec3 operator*(double s, const AffineVec3& a);

enum class Group { ANet, Geodesic, Coupling, Angle, Fairness, SurfaceClose, VertexClose, CurveClose, Flex, Driver, Misc };
std::string_view to_string(Group g);

/// r(x) = sum q x_a x_b + sum l x_a + d, contributing weight * r^2 to the energy.
struct QuadraticConstraint {
  std::vector<std::tuple<int, int, double>> quad;
  std::vector<std::pair<int, double>> lin;
  double constant = 0;
  double weight = 1;
  bool hard = true;
  Group group = Group::Misc;

  double value(const Eigen::VectorXd& x) const;
  /// Sparse gradient, possibly with repeated indices.
  void gradient(const Eigen::VectorXd& x, std::vector<std::pair<int, double>>& out) const;
};

/// <a, b> with diagonal metric (1, 1, eps) on the third component.
QuadraticConstraint dot(const AffineVec3& a, const AffineVec3& b, double eps = 1.0);
QuadraticConstraint affine_constraint(const Affine& a);
/// a += s * b
void append_scaled(QuadraticConstraint& a, const QuadraticConstraint& b, double s);

using Constraints = std::vector<QuadraticConstraint>;

struct Energies {
  double hard = 0, soft = 0;
  double total() const { return hard + soft; }
};
Energies energies(const Constraints& cs, const Eigen::VectorXd& x);

// --- Levenberg-Marquardt ---

struct LmOptions {
  double lambda0 = 1e-4, up = 4, down = 0.5, lambda_max = 1e6;
};

struct LmStep {
  double energy_before = 0, energy_after = 0, step_norm = 0, lambda = 0;
  int retries = 0;
};

/// One damped Gauss-Newton step on the weighted energy. Updates x and lambda.
/// Throws StallDetected when lambda exceeds its maximum, LinearSolveFailure
/// when the normal equations cannot be factorized.
LmStep lm_step(Eigen::VectorXd& x, const Constraints& cs, double& lambda, const LmOptions& opt = {});

// --- optimization state for webs ---

struct BinormalVar {
  Family family;
  int center, prev, next;  // vertex indices
  int offset;
};

struct SolverState {
  int rows = 0, cols = 0;
  Eigen::VectorXd x;
  std::vector<int> n_anet;  // per vertex offset of the A-net normal, -1 if none
  std::vector<int> n_geo;   // per vertex offset of the geodesic normal, -1 if none
  std::vector<BinormalVar> binormals;
  WebKind kind = WebKind::Generic;
  NetRoles roles;
  bool binormal_fallback = false;  // a collinear triple received the top-view fallback

  int vertex_count() const { return rows * cols; }
  int num_vars() const { return static_cast<int>(x.size()); }
  Vec3 f(int v) const { return x.segment<3>(3 * v); }
  Vec3 at(int offset) const { return x.segment<3>(offset); }
  Net net() const;
};

/// Variables per kind: vertices, then A-net normals (discrete normals of the
/// A-net stars), geodesic normals (0,0,1) and binormals (discrete binormals).
SolverState init_aux_variables(const Net& net, WebKind kind);

/// Refresh positions from a net, keeping auxiliary variables.
void set_positions(SolverState& s, const Net& net);

// --- constraint builders ---

void build_anet_constraints(const SolverState& s, Stencil stencil, Constraints& out);
void build_geodesic_constraints(const SolverState& s, Family family, double eps, Constraints& out);
/// eps-orthogonality of the geodesic normal to the central-difference tangents
/// of the i- and j-lines at its vertex.
void build_normal_coupling(const SolverState& s, double eps, Constraints& out);
/// Midpoint form away from the boundary, unit-tangent form next to it.
void build_fairness(const SolverState& s, const std::vector<Family>& families, double weight, Constraints& out);
void build_surface_closeness(const SolverState& s, double weight, Constraints& out);
void build_vertex_closeness(const SolverState& s, const std::vector<int>& vertices, double weight, Constraints& out,
                            bool hard = false);
/// Closeness of the given vertices to a reference polyline: motion normal to
/// the curve frame is penalized, tangential sliding is free.
void build_curve_closeness(const SolverState& s, const std::vector<int>& vertices, const std::vector<Vec3>& curve,
                           double weight, Constraints& out);
/// Central-line angle per face with previous-iteration eps-lengths.
void build_angle_constraints(const SolverState& s, double gamma, double eps, const std::vector<char>& face_included,
                             Constraints& out);

/// Faces without boundary vertices and farther than radius (top view) from
/// every flat point.
std::vector<char> angle_face_mask(const Net& net, const std::vector<Vec2>& flat_points, double radius);

// --- energies and continuation ---

struct Weights {
  double fairness = 1e-3, surf_close = 1e-3, vert_close = 1e-3;
};

Weights default_weights(WebKind kind);

struct SolverConfig {
  std::vector<double> eps_schedule{0.0, 0.25, 0.5, 0.75, 1.0};
  Weights weights;
  int max_iter_per_eps = 20;
  double hard_target = 1e-5;
  int decay_every = 5;   // weights / 10 every decay_every iterations
  int decay_steps = 2;   // reductions before the weights drop to zero
  LmOptions lm;
  // CRPC
  double gamma = std::numbers::pi / 3;
  std::vector<Vec2> flat_points;
  double flat_radius = 0;
  std::vector<Vec3> boundary_curve;  // prescribed boundary (empty: free)

  static SolverConfig for_kind(WebKind kind);
};

nlohmann::json config_to_json(const SolverConfig& c, WebKind kind);
SolverConfig config_from_json(const nlohmann::json& j, WebKind kind);

/// Hard and soft constraints of E^eps at the current state.
Constraints assemble_energy(const SolverState& s, WebKind kind, double eps, const SolverConfig& cfg,
                            const Weights& weights);

/// Hard energy of a net right after auxiliary initialization.
double initial_hard_energy(const Net& net, WebKind kind, double eps, const SolverConfig& cfg);

struct IterationStat {
  double eps = 0;
  int iteration = 0;
  double e_hard = 0, e_soft = 0, step_norm = 0, lambda = 0, seconds = 0;
};

struct EpsSummary {
  double eps = 0;
  int iterations = 0;
  double e_hard = 0;
  bool reached = false;
  bool stalled = false;
};

struct ContinuationResult {
  Net net;
  SolverState state;
  std::vector<IterationStat> iterations;
  std::vector<EpsSummary> per_eps;
  bool converged = false;  // final E_hard within target
  double final_e_hard = 0;
  double seconds = 0;
};

ContinuationResult run_continuation(const Net& net, WebKind kind, const SolverConfig& cfg);

nlohmann::json stats_to_json(const ContinuationResult& r, const SolverConfig& cfg);

/// Max over fairness-form residuals (midpoint form) of all web curves, divided
/// by the mean edge length.
double max_fairness_residual(const Net& net);

}  // namespace isoweb
