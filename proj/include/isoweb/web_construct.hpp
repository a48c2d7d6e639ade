#pragma once

#include <functional>
#include <vector>

#include "isoweb/net.hpp"

namespace isoweb {

struct LineFamily {
  std::vector<Line2> lines;
};

enum class DiagonalRule { Sum, Difference };

/// Straight-line web on a rows x cols index grid. Vertex (i, j) lies on
/// i_lines[i], j_lines[j] and diagonals[diagonal_index(i, j)].
struct LineWeb {
  int rows = 0, cols = 0;
  std::vector<Vec2> vertices;  // row-major
  LineFamily i_lines, j_lines, diagonals;
  DiagonalRule rule = DiagonalRule::Sum;
  int diagonal_offset = 0;

  Vec2 vertex(int i, int j) const { return vertices[i * cols + j]; }
  int diagonal_index(int i, int j) const {
    return rule == DiagonalRule::Sum ? i + j + diagonal_offset : i - j + diagonal_offset;
  }
  bool has_diagonals() const { return !diagonals.lines.empty(); }
};

/// Families x = i h, y = j h, x + y = k h for 0 <= i, j <= n.
LineWeb pencil_line_web(int n, double h);

/// Tangents 3 s x - s^3 y = 2 of the cuspidal cubic at parameters u_i and v_j.
/// Diagonals (s = -(u_i + v_j)) are built when u and v are arithmetic with a
/// common step.
LineWeb cubic_tangent_web(const std::vector<double>& u, const std::vector<double>& v);

/// GGG net over the web with heights phi(x, y). Sum-indexed diagonals are
/// turned into (i - j)-lines by reversing the j direction.
Net lift_to_graph(const LineWeb& web, const std::function<double(double, double)>& phi);

// --- AAG by propagation ---

struct AagSeed {
  std::vector<Line2> lines;          // D_0 .. D_2n
  std::vector<Vec3> diagonal;        // f_00 .. f_nn on D_n
  std::vector<Vec3> subdiagonal;     // f_{0,-1}, f_10, ..., f_{n+1,n} on D_{n+1}
  int n() const { return static_cast<int>(diagonal.size()) - 1; }
};

/// Exact isotropic AAG web of (n+1) x (n+1) vertices.
Net aag_propagate(const AagSeed& seed, double singular_tol = 1e-10);

// --- planar Koenigs nets ---

struct KoenigsSeed {
  std::vector<Line2> lines;        // D_0 .. D_2n
  std::vector<Vec2> boundary;      // f_{0,n}, ..., f_{0,0}, f_{1,0}, ..., f_{n,0}
  std::vector<Vec2> diagonal;      // f_11 .. f_nn on D_n
  std::vector<Vec2> superdiagonal; // f_12 .. f_{n-1,n} on D_{n-1}
  double nu00 = 1, nu01 = 1;
  int n() const { return static_cast<int>(diagonal.size()); }
};

struct KoenigsData {
  Net net;                           // z = 0
  Eigen::MatrixXd nu;                // (n+1) x (n+1)
  std::vector<Vec2> m;               // face diagonal intersections, n x n row-major
  Vec2 diag_point(int i, int j) const { return m[i * (net.cols() - 1) + j]; }
};

KoenigsData koenigs_propagate(const KoenigsSeed& seed, double singular_tol = 1e-12);

/// Max relative mismatch of the multiplier relations with the diagonal
/// intersections recomputed from the net.
double koenigs_residual(const Net& planar, const Eigen::MatrixXd& nu);

// --- lifts over fixed top views ---

struct HeightAnchor {
  int i = 0, j = 0;
  double z = 0;
};

struct LiftResult {
  Net net;
  double residual = 0;  // max star coplanarity defect, relative to max(1, |z|)
  bool trivial = false; // affine (planar) lift
};

/// Least-squares heights making every star of the given stencils coplanar,
/// with anchored heights eliminated. Throws ZeroPivot (naming a vertex) when
/// the anchors do not determine the lift.
LiftResult solve_lift(const Net& topviews, const std::vector<HeightAnchor>& anchors,
                      const std::vector<Stencil>& stencils, double pivot_tol = 1e-12);

/// A-net over the top views with heights fixed on the given vertices.
Net anet_lift(const Net& topviews, const std::vector<HeightAnchor>& anchors);

/// Heights of net along the i = 0 row and the j = 0 column.
std::vector<HeightAnchor> side_anchors(const Net& net);

/// Four vertices of the stencil's parity class that pin its lift space
/// (affine part plus one amplitude). Throws ZeroPivot if no candidate set does.
std::vector<VertexRef> lift_anchor_vertices(const Net& net, Stencil s);

/// Lift of the given stencils closest (least squares over all vertices) to a
/// target height function.
Net fit_lift(const Net& topviews, const std::vector<Stencil>& stencils,
             const std::function<double(double, double)>& target);

// --- AGAG ---

struct GNet {
  Net net;  // planar, z = 0
  LineWeb web;
};

/// Intersections of two line families; vertex (i, j) = a[i] cap b[j].
GNet tangent_line_gnet(const LineFamily& a, const LineFamily& b);

/// Tangents x cos t + y sin t = 1 of the unit circle.
GNet conic_tangent_gnet(const std::vector<double>& thetas, const std::vector<double>& phis);

/// Joint lift making both diagonal nets A-nets. Throws InconsistentLift when
/// the relative residual exceeds tol.
Net build_agag(const Net& gnet, const std::vector<HeightAnchor>& anchors, double tol = 1e-6);

/// Default AAG via Koenigs: lift fitted to a target surface.
Net aag_from_koenigs(const KoenigsData& data, const std::function<double(double, double)>& target);

}  // namespace isoweb
