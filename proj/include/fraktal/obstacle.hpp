#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fraktal/energy.hpp"
#include "fraktal/field_expr.hpp"
#include "fraktal/mesh.hpp"

namespace fraktal {

enum class InitKind { Midpoint, Lower, Upper, Random };

// Full description of one discrete double-obstacle problem.
struct ProblemSpec {
  int level = 0;
  double s = 0.8;
  double p = 3.0;
  double h = 0.0;           // 0 picks the default 3^-n / 4
  int boundary_subdiv = 2;
  ScalarField f, b, phi1, phi2;
  double tol = 1e-6;
  int max_iters = 20000;
  std::uint64_t seed = 0;
  bool accel = false;
  InitKind init = InitKind::Midpoint;
  int workers = 0;          // 0: FRAKTAL_WORKERS / hardware
  double delta_override = -1.0;  // < 0 keeps (3/4)^n
};

// Geometry, mesh, sampled coefficients and the energy context for a spec.
// Owns the mesh behind a stable address so the context's pointer stays valid.
class Problem {
 public:
  static Problem assemble(const ProblemSpec& spec);

  const ProblemSpec& spec() const { return spec_; }
  const DomainMesh& mesh() const { return *mesh_; }
  const EnergyContext& ctx() const { return ctx_; }
  const GridFunction& lower() const { return lower_; }
  const GridFunction& upper() const { return upper_; }
  const GridFunction& f_vals() const { return f_vals_; }

  // Energy of u with its boundary block refreshed to the trace of u.
  double traced_energy(GridFunction u) const;

  // Gradient of the trace-reduced objective: the interior gradient plus each
  // boundary entry folded onto its anchor node.
  Eigen::VectorXd reduced_gradient(const GridFunction& u) const;

 private:
  Problem() = default;
  ProblemSpec spec_;
  std::unique_ptr<PrefractalDomain> domain_;
  std::unique_ptr<DomainMesh> mesh_;
  GridFunction f_vals_, b_vals_, lower_, upper_;
  EnergyContext ctx_;
};

struct TraceRow {
  double energy;
  double step;
  double residual;
};

struct SolveReport {
  GridFunction solution;  // boundary block = trace of the interior solution
  int iterations = 0;
  double final_energy = 0.0;
  double kkt_residual = 0.0;
  std::vector<int> active_lower, active_upper, inactive;
  std::vector<TraceRow> trace;
};

// Componentwise median(lower, u, upper). Throws SolverError if lower > upper
// anywhere.
GridFunction project_box(const GridFunction& u, const GridFunction& lower,
                         const GridFunction& upper);

// Projected gradient descent with Armijo backtracking (initial step 1.0,
// shrink 0.5, sufficient decrease 1e-4) on the trace-reduced energy; optional
// Nesterov acceleration with restart on energy increase. Terminates when the
// unit-step fixed-point residual drops to spec.tol, else throws
// NonConvergenceError after max_iters.
SolveReport solve_obstacle(const Problem& problem, std::optional<GridFunction> init = {});

// a(u, v - u) - sum_i w_i f_i (v_i - u_i); at a solution this is >= -tol for
// every feasible v. Both arguments must be feasible within 1e-9.
double vi_residual(const Problem& problem, const GridFunction& u, const GridFunction& v);

// Lewy-Stampacchia diagnostics: per node, the collocation operator applied to
// the solution and to both obstacles, the load, the node class, and whether
// each orientation of the sandwich holds within 1e-3 * max|f|. Both
// orientations are reported; neither is asserted.
struct LSRow {
  int node = 0;
  double L_u = 0.0, L_phi1 = 0.0, L_phi2 = 0.0, f = 0.0;
  char cls = 'i';  // 'i' inactive, 'l' lower, 'u' upper, 'e' equality (phi1 == phi2)
  bool printed_ok = false;   // max(L(phi2), f/2) <= L(u) <= min(L(phi1), f/2)
  bool mirrored_ok = false;  // max(L(phi1), f/2) >= L(u) >= min(L(phi2), f/2)
};

struct LSReport {
  std::vector<LSRow> rows;
  double tol_ls = 0.0;
  int printed_hold_count = 0;
  int mirrored_hold_count = 0;
  int count_inactive = 0, count_lower = 0, count_upper = 0, count_equality = 0;
  // sup over inactive nodes of |L_u - f/2| (the discrete stationarity gap)
  double max_inactive_stationarity = 0.0;
};

LSReport lewy_stampacchia_report(const Problem& problem, const SolveReport& report);

}  // namespace fraktal
