#pragma once

#include <functional>

#include "isoweb/crpc.hpp"
#include "isoweb/web_construct.hpp"

// Standard desk-scale instances shared by the CLI, the acceptance run and tests.
namespace isoweb::recipes {

using HeightFn = std::function<double(double, double)>;

/// Pencil web with spacing h lifted to phi; (n+1) x (n+1) vertices.
Net ggg_pencil(int n, double h, const HeightFn& phi);

/// Cuspidal-cubic tangent web u_i = u0 + i du, v_j = v0 + j du, lifted to phi.
Net ggg_cubic(int count, double u0, double v0, double du, const HeightFn& phi);

/// Algorithm 1 with diagonals y = x + (n - l) h and seeds sampled from phi.
Net aag_propagation(int n, double h, const HeightFn& phi);

/// Algorithm 2 on a jittered diagonal grid (deterministic for a given rng seed),
/// lifted by least squares to phi.
Net aag_koenigs(int n, double h, double jitter, unsigned rng_seed, const HeightFn& phi);

/// Tangent lines of the unit circle at linspace(t0, t1) x linspace(p0, p1),
/// lifted to the AGAG closest to phi along two sides.
Net agag_conic(int rows, int cols, double t0, double t1, double p0, double p1, const HeightFn& phi);

/// Asymptotic trace of the ansatz graph with heights multiplied by
/// height_scale (an isotropic similarity: top-view angles are unchanged).
TraceResult crpc_ansatz_trace(const CrpcAnsatz& a, double height_scale, const Vec2& seed, int rows, int cols,
                              double step, const Vec2& first_dir = Vec2(1, 0));

/// Same net with the j direction reversed; central angles become supplementary.
Net reverse_j(const Net& net);

/// Planar-faced net: first row and column jittered, every further vertex in
/// the plane of its three known face corners. Generic, hence rigid.
Net random_qnet(int rows, int cols, unsigned rng_seed);

/// z = xy over [-r, r]^2 with exact Hessian.
GraphSample saddle_graph(double r);

}  // namespace isoweb::recipes
