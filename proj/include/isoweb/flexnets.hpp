#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "isoweb/net.hpp"
#include "isoweb/solver.hpp"
#include "json.hpp"

namespace isoweb {

// --- generalized T-nets ---

/// P_ij = a_i + sigma_i b_j for 0 <= i <= m+1, 0 <= j <= n+1.
struct ConeCylinderData {
  std::vector<Vec3> a, b;
  std::vector<double> sigma;

  int m() const { return static_cast<int>(a.size()) - 2; }
  int n() const { return static_cast<int>(b.size()) - 2; }
  /// Throws InvalidInput on size mismatch, zero sigma or fewer than 2 a/b.
  void validate() const;
};

Net cone_cylinder_net(const ConeCylinderData& d);

/// Metric dual of the cone-cylinder net: f_ij is dual to the plane of the
/// face P_ij P_{i+1,j} P_{i+1,j+1} P_{i,j+1}, so the result has (m+1) x (n+1)
/// vertices and the face (i, j) of the result is dual to P_{i+1,j+1}.
/// i-lines are planar, j-lines lie in isotropic planes.
Net tnet_from_cone_cylinder(const ConeCylinderData& d);

/// Random cone-cylinder data with well-separated denominators.
ConeCylinderData random_cone_cylinder(int m, int n, unsigned seed);

// --- class checks ---

struct ParallelPair {
  int k = 0, l = 0;  // the pair p_{k,l}, p_{k+2,l} (or p_{l,k}, p_{l,k+2} for the j-direction)
};

struct ClassIDirection {
  std::vector<double> deviation;  // per k, max distance of a line to the common line over mean edge length
  std::vector<ParallelPair> parallel;
  bool tested = false;  // at least one intersection line exists
  bool passes = false;
};

struct ClassIReport {
  ClassIDirection along_i;  // lines p_{k,j} cap p_{k+2,j}
  ClassIDirection along_j;  // lines p_{i,l} cap p_{i,l+2}
  bool passes = false;      // either direction passes
  bool degenerate = false;  // no intersection line anywhere
};

ClassIReport class_i_check(const Net& net, double tol = 1e-8);

struct ClassIIEdge {
  int i = 0, j = 0;
  EdgeDir dir = EdgeDir::PlusI;
  double ratio_a = 0, ratio_b = 0;  // at (i,j) and at the other end, both for the edge oriented away from (i,j)
  bool degenerate = false;
};

struct ClassIIReport {
  std::vector<ClassIIEdge> edges;
  double max_mismatch = 0;
  bool passes = false;
};

ClassIIReport class_ii_check(const Net& net, double tol = 1e-8);

/// Vertices moved by damped Gauss-Newton (finite-difference Jacobian) until
/// faces are planar and opposite ratios agree across interior edges.
struct ClassIIFit {
  Net net;
  int iterations = 0;
  double residual = 0;  // max abs residual
};
ClassIIFit optimize_class_ii(const Net& start, int max_iter = 100, double tol = 1e-12);

// --- projective maps fixing the isotropic direction ---

struct ZProjectiveMap {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();

  /// Throws InvalidInput unless M e_3 is a multiple of e_3 and det M != 0.
  explicit ZProjectiveMap(const Eigen::Matrix4d& m);
  ZProjectiveMap() = default;
  Vec3 operator()(const Vec3& p) const;
};

Net z_projective_transform(const Net& net, const ZProjectiveMap& map);

// --- flexion ---

enum class FlexGeometry { Isotropic, Euclidean };

/// Interior edge (i,j)-(i+1,j) for PlusI or (i,j)-(i,j+1) for PlusJ, driven
/// from its reference angle to target.
struct FlexDriver {
  int i = 1, j = 1;
  EdgeDir dir = EdgeDir::PlusI;
  double target = 0;
};

struct FlexOptions {
  int max_iter = 15;
  double residual_tol = 1e-5;      // max abs hard residual per step
  double converge_energy = 1e-22;  // early stop
  LmOptions lm{.lambda0 = 1e-8};   // steps start close to the solution
  bool keep_partial = false;       // return the completed steps instead of throwing StepFailed
};

/// Reference quantities frozen at t = 0.
struct FlexionState {
  FlexGeometry geometry = FlexGeometry::Isotropic;
  Net net;
  double t = 0;
  std::vector<std::pair<int, int>> pairs;  // vertex index pairs: edges and face diagonals
  std::vector<double> sq_lengths;          // top-view (isotropic) or 3D squared lengths
  std::vector<int> omega_vertices;         // interior vertices (isotropic)
  std::vector<double> omega;

  static FlexionState isotropic(const Net& net);
  static FlexionState euclidean(const Net& net);
};

/// Signed isotropic angle between the faces at the driver edge: the top-view
/// distance of their dual points, signed by the edge orientation.
double isotropic_dihedral(const Net& net, const FlexDriver& d);
/// Signed angle between oriented face normals about the driver edge.
double euclidean_dihedral(const Net& net, const FlexDriver& d);

struct FlexStep {
  double t = 0;
  Net net;
  int iterations = 0;
  double e_hard = 0;
  double max_residual = 0;
  double angle = 0;
};

struct FlexResult {
  std::vector<FlexStep> steps;  // steps + 1 entries, the first is the input
  double start_angle = 0;
  bool class_warning = false;  // isotropic input passed neither class check
  int failed_step = 0;         // with keep_partial: first failed step, 0 if none
  std::string failure;
};

/// Throws StepFailed when a step ends with a hard residual above the tolerance
/// (unless keep_partial is set).
FlexResult isotropic_flexion(const FlexionState& state, const FlexDriver& driver, int steps,
                             const FlexOptions& opt = {});
FlexResult euclidean_flexion(const FlexionState& state, const FlexDriver& driver, int steps,
                             const FlexOptions& opt = {});

/// Max drift of the frozen quantities of state over a net.
struct FlexDrift {
  double length = 0;  // squared-length drift over reference squared length, as length ratio
  double omega = 0;
  double planarity = 0;  // max corner distance to fitted face plane over mean edge length
};
FlexDrift flex_drift(const FlexionState& state, const Net& net);

/// Miura-ori fold: translational net of a zigzag in the xz-plane and a zigzag
/// in the xy-plane. Euclidean flexible with one degree of freedom.
Net miura_ori(int rows, int cols, double s, double h, double d, double l);

nlohmann::json flex_manifest(const FlexResult& r, const FlexDriver& d, const std::vector<std::string>& files);

}  // namespace isoweb
