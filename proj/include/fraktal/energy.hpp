#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fraktal/mesh.hpp"

namespace fraktal {

// Precomputed state for evaluating the discrete nonlocal energy
//
//   J(u) = (1/p) sum_{i != j} w_i w_j |u_i - u_j|^p / d_ij^{2+sp}
//        - sum_i w_i f_i u_i
//        + (delta_n / p) sum_k arc_k b_k |u^b_k|^p
//
// together with its gradient, the collocation operator L and the form a.
// Distances are taken in coordinates scaled by the snowflake diameter, so
// d <= 1 and the singular kernel cannot overflow for large p.
//
// The pair loop is blocked into tiles of 128 nodes; partial results are
// accumulated per tile pair and reduced in a fixed order, so results are
// bit-identical for any worker count. The kernel matrix is materialized
// when it fits the memory budget, otherwise recomputed per pair.
struct EnergyContext {
  const DomainMesh* mesh = nullptr;
  double s = 0.0;
  double p = 0.0;
  double delta_n = 0.0;
  int workers = 1;

  Eigen::VectorXd f_vals;         // f at interior nodes
  Eigen::VectorXd boundary_coef;  // delta_n * arc_k * b_k per boundary node

  // derived
  double kernel_exponent = 0.0;  // 2 + s p
  int p_int = -1;                // p when it is a small integer, else -1
  Eigen::Matrix2Xd scaled_nodes;
  Eigen::VectorXd w;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> kernel;  // optional
  bool kernel_cached = false;
  std::vector<int> tile_starts;  // tile t spans [tile_starts[t], tile_starts[t+1])
};

// Builds the context. Enforces 2 < s p < p and b > 0 at every boundary node.
// `workers` <= 0 picks FRAKTAL_WORKERS or the hardware count; `delta_override`
// < 0 keeps the mesh's (3/4)^n.
EnergyContext make_energy_context(const DomainMesh& mesh, double s, double p,
                                  const GridFunction& f_field, const GridFunction& b_field,
                                  int workers = 0, double delta_override = -1.0);

// J(u). Throws EnergyError if any partial sum leaves [-1e300, 1e300].
double energy(const EnergyContext& ctx, const GridFunction& u);

// Interior entries 2 w_i L_i - w_i f_i; boundary entries
// delta_n arc_k b_k |u^b_k|^{p-2} u^b_k. Interior and boundary blocks are
// gradients in their own coordinates (the trace coupling is applied by the
// obstacle solver, not here).
GridFunction gradient(const EnergyContext& ctx, const GridFunction& u);

// Collocation value of the regional fractional p-Laplacian,
// L_i = sum_{j != i} w_j |u_i - u_j|^{p-2} (u_i - u_j) / d_ij^{2+sp}.
// Boundary entries are zero.
GridFunction discrete_operator(const EnergyContext& ctx, const GridFunction& u);

// a(u, v) = sum_{i != j} w_i w_j |u_i-u_j|^{p-2}(u_i-u_j)(v_i-v_j)/d_ij^{2+sp}
//         + delta_n sum_k arc_k b_k |u^b_k|^{p-2} u^b_k v^b_k.
double form_a(const EnergyContext& ctx, const GridFunction& u, const GridFunction& v);

// Resolves the effective worker count (FRAKTAL_WORKERS, hardware fallback).
int resolve_workers(int requested);

}  // namespace fraktal
