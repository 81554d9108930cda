#include "fraktal/limit.hpp"

#include <cmath>

#include "fraktal/errors.hpp"

namespace fraktal {

int HolderConstraintSet::pair_index(int i, int j) const {
  const int m = size();
  // rows listed as (0,1),(0,2),...,(0,m-1),(1,2),...
  return i * m - i * (i + 1) / 2 + (j - i - 1);
}

HolderConstraintSet make_holder_constraints(const std::vector<Point2>& nodes, double s, double C1,
                                            double C2, const Eigen::VectorXd& lower,
                                            const Eigen::VectorXd& upper) {
  if (!(C1 > 0.0) || !(C2 > 0.0))
    throw ConfigError("Hoelder constraint set requires positive C1, C2");
  HolderConstraintSet cset;
  cset.nodes = nodes;
  cset.s = s;
  cset.C1 = C1;
  cset.C2 = C2;
  cset.lower = lower;
  cset.upper = upper;
  const int m = cset.size();
  cset.c.resize(cset.pair_count());
  int r = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      cset.c[r++] = C2 * std::pow((nodes[static_cast<std::size_t>(i)] -
                                   nodes[static_cast<std::size_t>(j)]).norm(), s);
  return cset;
}

double holder_violation(const HolderConstraintSet& cset, const Eigen::VectorXd& v) {
  const int m = cset.size();
  double worst = 0.0;
  int r = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      worst = std::max(worst, std::fabs(v[i] - v[j]) - cset.c[r++]);
  return std::max(worst, 0.0);
}

LimitSolveReport solve_limit(const HolderConstraintSet& cset, const Eigen::VectorXd& weights,
                             const Eigen::VectorXd& f_vals, double tol, int max_iters) {
  const int m = cset.size();
  if (weights.size() != m || f_vals.size() != m)
    throw SolverError("solve_limit: data size does not match the node set");

  // The feasible set is certified nonempty through the obstacles.
  if (holder_violation(cset, cset.lower) > 1e-9 || holder_violation(cset, cset.upper) > 1e-9)
    throw SolverError("solve_limit: infeasible constraints (obstacles are not C2-Hoelder)");
  if (cset.lower.cwiseAbs().maxCoeff() > cset.C1 + 1e-9 ||
      cset.upper.cwiseAbs().maxCoeff() > cset.C1 + 1e-9)
    throw SolverError("solve_limit: infeasible constraints (obstacles exceed the sup bound C1)");
  if (((cset.upper - cset.lower).array() < 0.0).any())
    throw SolverError("solve_limit: infeasible constraints (lower obstacle above upper)");

  const Eigen::VectorXd box_lo = cset.lower.cwiseMax(-cset.C1);
  const Eigen::VectorXd box_hi = cset.upper.cwiseMin(cset.C1);
  const Eigen::VectorXd load = weights.cwiseProduct(f_vals);

  // Rows of A: (e_i - e_j) / c_ij, constraint |A v| <= 1 per row.
  const int rows = cset.pair_count();
  Eigen::VectorXd inv_c = cset.c.cwiseInverse();

  const auto apply_A = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    int r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        out[r] = (x[i] - x[j]) * inv_c[r];
        ++r;
      }
  };
  const auto apply_At = [&](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
    out.setZero();
    int r = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double t = y[r] * inv_c[r];
        out[i] += t;
        out[j] -= t;
        ++r;
      }
  };

  // ||A|| by 50 steps of power iteration on A^T A.
  double norm_a = 1.0;
  if (rows > 0) {
    Eigen::VectorXd x = Eigen::VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd ax(rows), atax(m);
    for (int it = 0; it < 50; ++it) {
      apply_A(x, ax);
      apply_At(ax, atax);
      const double nrm = atax.norm();
      if (nrm == 0.0) break;
      x = atax / nrm;
      norm_a = std::sqrt(nrm);
    }
  }
  const double step = 0.95 / std::max(norm_a, 1e-12);
  const double tau = step, sigma = step;

  // Primal start: midpoint of the box (feasible for box and sup bounds);
  // dual start: zero.
  Eigen::VectorXd x = 0.5 * (box_lo + box_hi);
  Eigen::VectorXd xbar = x, xold = x;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd ax(rows), aty(m);

  LimitSolveReport report;
  double prev_obj = load.dot(x);
  int it = 0;
  for (; it < max_iters; ++it) {
    // Dual ascent + shrink: prox of sigma * support([-1,1]) is soft threshold.
    apply_A(xbar, ax);
    for (int r = 0; r < rows; ++r) {
      const double z = y[r] + sigma * ax[r];
      y[r] = z - sigma * std::clamp(z / sigma, -1.0, 1.0);
    }
    // Primal descent with the linear objective folded in, then box projection.
    apply_At(y, aty);
    xold = x;
    x = (x - tau * aty + tau * load).cwiseMax(box_lo).cwiseMin(box_hi);
    xbar = 2.0 * x - xold;

    if ((it + 1) % 100 == 0) {
      const double obj = load.dot(x);
      const double viol = holder_violation(cset, x);
      if (viol <= tol && std::fabs(obj - prev_obj) <= tol * (1.0 + std::fabs(obj))) {
        ++it;
        break;
      }
      prev_obj = obj;
    }
  }
  if (it >= max_iters)
    throw NonConvergenceError("solve_limit: PDHG did not converge in " +
                                  std::to_string(max_iters) + " iterations",
                              holder_violation(cset, x));

  report.maximizer = x;
  report.objective = load.dot(x);
  report.max_holder_violation = holder_violation(cset, x);
  double box_viol = 0.0;
  for (int i = 0; i < m; ++i)
    box_viol = std::max({box_viol, box_lo[i] - x[i], x[i] - box_hi[i]});
  report.max_box_violation = std::max(box_viol, 0.0);
  report.iterations = it;
  return report;
}

Eigen::VectorXd mcshane_extend(const std::vector<Point2>& source_nodes,
                               const Eigen::VectorXd& source_values,
                               const std::vector<Point2>& target_nodes, double C2, double s) {
  const int src = static_cast<int>(source_nodes.size());
  if (source_values.size() != src)
    throw SolverError("mcshane_extend: value/node count mismatch");
  for (int i = 0; i < src; ++i)
    for (int j = i + 1; j < src; ++j) {
      const double bound =
          C2 * std::pow((source_nodes[static_cast<std::size_t>(i)] -
                         source_nodes[static_cast<std::size_t>(j)]).norm(), s);
      if (std::fabs(source_values[i] - source_values[j]) > bound + 1e-9)
        throw SolverError("mcshane_extend: source is not C2-Hoelder on its nodes");
    }

  Eigen::VectorXd out(static_cast<int>(target_nodes.size()));
  for (std::size_t t = 0; t < target_nodes.size(); ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (int yi = 0; yi < src; ++yi) {
      const double d = (target_nodes[t] - source_nodes[static_cast<std::size_t>(yi)]).norm();
      best = std::max(best, source_values[yi] - C2 * std::pow(d, s));
    }
    out[static_cast<int>(t)] = best;
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> envelopes(const std::vector<Point2>& nodes,
                                                      const Eigen::VectorXd& phi1,
                                                      const Eigen::VectorXd& phi2, double C2,
                                                      double s) {
  const int m = static_cast<int>(nodes.size());
  Eigen::VectorXd e1(m), e2(m);
  for (int i = 0; i < m; ++i) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j) {
      const double d = (nodes[static_cast<std::size_t>(i)] -
                        nodes[static_cast<std::size_t>(j)]).norm();
      const double shift = C2 * std::pow(d, s);
      lo = std::max(lo, phi1[j] - shift);
      hi = std::min(hi, phi2[j] + shift);
    }
    e1[i] = lo;
    e2[i] = hi;
  }
  return {e1, e2};
}

Eigen::VectorXd lattice_clip(const Eigen::VectorXd& w, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  return w.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace fraktal
