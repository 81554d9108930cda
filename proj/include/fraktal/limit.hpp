#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fraktal/mesh.hpp"

namespace fraktal {

// Feasible set of the p = infinity problem on a node set: obstacle box,
// sup-norm bound C1, and all pairwise Hoelder bounds |v_i - v_j| <= C2 d_ij^s.
// The legacy single-norm mode ||v||_{s,inf} <= 1 is C1 = C2 = 1/2.
struct HolderConstraintSet {
  std::vector<Point2> nodes;
  double s = 0.8;
  double C1 = 0.5;
  double C2 = 0.5;
  Eigen::VectorXd lower, upper;  // obstacle samples at the nodes
  Eigen::VectorXd c;             // pairwise bounds C2 d_ij^s, flattened i < j

  int size() const { return static_cast<int>(nodes.size()); }
  int pair_count() const { return size() * (size() - 1) / 2; }
  // Flat index of pair (i, j), i < j.
  int pair_index(int i, int j) const;
};

HolderConstraintSet make_holder_constraints(const std::vector<Point2>& nodes, double s, double C1,
                                            double C2, const Eigen::VectorXd& lower,
                                            const Eigen::VectorXd& upper);

struct LimitSolveReport {
  Eigen::VectorXd maximizer;
  double objective = 0.0;
  double max_holder_violation = 0.0;
  double max_box_violation = 0.0;
  int iterations = 0;
};

// Maximizes sum_i weight_i f_i v_i over the constraint set with primal-dual
// hybrid gradient (tau sigma ||A||^2 <= 1, ||A|| from 50 power-iteration
// steps). Checks first that the obstacles themselves satisfy the pairwise and
// sup bounds within 1e-9; throws SolverError otherwise, and
// NonConvergenceError when max_iters is exhausted.
LimitSolveReport solve_limit(const HolderConstraintSet& cset, const Eigen::VectorXd& weights,
                             const Eigen::VectorXd& f_vals, double tol = 1e-8,
                             int max_iters = 200000);

// McShane extension u~(x) = max_y { u(y) - C2 |x - y|^s } from source nodes
// onto target points. The source must satisfy its own Hoelder bounds within
// 1e-9 (SolverError otherwise).
Eigen::VectorXd mcshane_extend(const std::vector<Point2>& source_nodes,
                               const Eigen::VectorXd& source_values,
                               const std::vector<Point2>& target_nodes, double C2, double s);

// Upper/lower regularized envelopes of the obstacles over the shared nodes:
//   phi1~(x) = max_y { phi1(y) - C2 |x-y|^s },
//   phi2~(x) = min_y { phi2(y) + C2 |x-y|^s }.
std::pair<Eigen::VectorXd, Eigen::VectorXd> envelopes(const std::vector<Point2>& nodes,
                                                      const Eigen::VectorXd& phi1,
                                                      const Eigen::VectorXd& phi2, double C2,
                                                      double s);

// Componentwise min(upper, max(w, lower)).
Eigen::VectorXd lattice_clip(const Eigen::VectorXd& w, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper);

// Largest pairwise Hoelder violation max_{i<j} (|v_i - v_j| - C2 d_ij^s)_+ .
double holder_violation(const HolderConstraintSet& cset, const Eigen::VectorXd& v);

}  // namespace fraktal
