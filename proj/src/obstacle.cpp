#include "fraktal/obstacle.hpp"

#include <cmath>

#include "fraktal/errors.hpp"

namespace fraktal {

namespace {

double default_spacing(int level) {
  double seg = 1.0;
  for (int i = 0; i < level; ++i) seg /= 3.0;
  return seg / 4.0;
}

Eigen::VectorXd clamp_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  return u.cwiseMax(lo).cwiseMin(hi);
}

// Deterministic uniform double in [0,1) from a 64-bit state (splitmix64).
struct SplitMix64 {
  std::uint64_t state;
  double next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

}  // namespace

Problem Problem::assemble(const ProblemSpec& spec) {
  Problem pr;
  pr.spec_ = spec;
  pr.domain_ = std::make_unique<PrefractalDomain>(build_domain(spec.level));
  const double h = spec.h > 0.0 ? spec.h : default_spacing(spec.level);
  pr.mesh_ = std::make_unique<DomainMesh>(build_mesh(*pr.domain_, h, spec.boundary_subdiv));

  pr.f_vals_ = sample_field(spec.f, *pr.mesh_);
  pr.b_vals_ = sample_field(spec.b, *pr.mesh_);
  pr.lower_ = sample_field(spec.phi1, *pr.mesh_);
  pr.upper_ = sample_field(spec.phi2, *pr.mesh_);
  for (int i = 0; i < pr.mesh_->interior_count(); ++i) {
    if (!(pr.lower_.values[i] <= pr.upper_.values[i]))
      throw ConfigError("obstacles violate phi1 <= phi2 at interior node " + std::to_string(i) +
                        " (" + std::to_string(pr.lower_.values[i]) + " > " +
                        std::to_string(pr.upper_.values[i]) + ")");
  }
  pr.ctx_ = make_energy_context(*pr.mesh_, spec.s, spec.p, pr.f_vals_, pr.b_vals_, spec.workers,
                                spec.delta_override);
  return pr;
}

double Problem::traced_energy(GridFunction u) const {
  apply_trace(*mesh_, u);
  return energy(ctx_, u);
}

Eigen::VectorXd Problem::reduced_gradient(const GridFunction& u) const {
  const GridFunction g = gradient(ctx_, u);
  Eigen::VectorXd out = g.values;
  const auto& anchor = mesh_->boundary_anchor;
  for (int k = 0; k < mesh_->boundary_count(); ++k) out[anchor[static_cast<std::size_t>(k)]] += g.boundary_values[k];
  return out;
}

GridFunction project_box(const GridFunction& u, const GridFunction& lower,
                         const GridFunction& upper) {
  if ((lower.values.array() > upper.values.array()).any())
    throw SolverError("project_box: lower obstacle exceeds upper obstacle");
  GridFunction out = u;
  out.values = clamp_vec(u.values, lower.values, upper.values);
  return out;
}

namespace {

GridFunction initial_iterate(const Problem& pr, const std::optional<GridFunction>& init) {
  const auto& mesh = pr.mesh();
  GridFunction u = GridFunction::zeros(mesh);
  if (init) {
    if (init->mesh_id != mesh.id)
      throw SolverError("solve_obstacle: init lives on another mesh");
    u.values = init->values;
  } else {
    switch (pr.spec().init) {
      case InitKind::Midpoint:
        u.values = 0.5 * (pr.lower().values + pr.upper().values);
        break;
      case InitKind::Lower:
        u.values = pr.lower().values;
        break;
      case InitKind::Upper:
        u.values = pr.upper().values;
        break;
      case InitKind::Random: {
        SplitMix64 rng{pr.spec().seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull};
        u.values.resize(mesh.interior_count());
        for (int i = 0; i < mesh.interior_count(); ++i) {
          const double lo = pr.lower().values[i], hi = pr.upper().values[i];
          u.values[i] = lo + rng.next() * (hi - lo);
        }
        break;
      }
    }
  }
  u.values = clamp_vec(u.values, pr.lower().values, pr.upper().values);
  apply_trace(mesh, u);
  return u;
}

}  // namespace

SolveReport solve_obstacle(const Problem& problem, std::optional<GridFunction> init) {
  const auto& mesh = problem.mesh();
  const auto& spec = problem.spec();
  const Eigen::VectorXd& lo = problem.lower().values;
  const Eigen::VectorXd& hi = problem.upper().values;

  GridFunction u = initial_iterate(problem, init);
  double e_u = energy(problem.ctx(), u);

  SolveReport report;
  report.trace.reserve(256);

  // Nesterov state (used only when spec.accel).
  GridFunction u_prev = u;
  double tau = 1.0;

  double last_step = 0.0;
  int iter = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (;; ++iter) {
    GridFunction y = u;
    if (spec.accel && iter > 0) {
      const double tau_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tau * tau));
      const double omega = (tau - 1.0) / tau_next;
      tau = tau_next;
      y.values = u.values + omega * (u.values - u_prev.values);
      y.values = clamp_vec(y.values, lo, hi);
      apply_trace(mesh, y);
    }

    const Eigen::VectorXd G = problem.reduced_gradient(y);
    // Unit-step fixed-point residual of the projected gradient map at y; for
    // the monotone variant y == u, so this certifies the returned iterate.
    residual = (y.values - clamp_vec(y.values - G, lo, hi)).cwiseAbs().maxCoeff();
    report.trace.push_back({e_u, last_step, residual});
    if (residual <= spec.tol) {
      if (!spec.accel) break;
      // Accelerated path: re-certify at u itself before accepting.
      const Eigen::VectorXd Gu = problem.reduced_gradient(u);
      const double ru = (u.values - clamp_vec(u.values - Gu, lo, hi)).cwiseAbs().maxCoeff();
      if (ru <= spec.tol) {
        residual = ru;
        break;
      }
    }
    if (iter >= spec.max_iters)
      throw NonConvergenceError("solve_obstacle: no convergence after " +
                                    std::to_string(spec.max_iters) +
                                    " iterations (residual " + std::to_string(residual) + ")",
                                residual);

    const double e_y = spec.accel ? problem.traced_energy(y) : e_u;

    // Armijo backtracking on the trace-reduced energy.
    double t = 1.0;
    GridFunction trial = GridFunction::zeros(mesh);
    double e_trial = 0.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial.values = clamp_vec(y.values - t * G, lo, hi);
      apply_trace(mesh, trial);
      e_trial = energy(problem.ctx(), trial);
      const double decrease = G.dot(trial.values - y.values);  // <= 0
      if (e_trial <= e_y + 1e-4 * decrease) {
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved)
      throw NonConvergenceError(
          "solve_obstacle: line search stalled (residual " + std::to_string(residual) + ")",
          residual);

    if (spec.accel && e_trial > e_u) {
      // Restart: drop momentum, take a plain projected step from u.
      tau = 1.0;
      const Eigen::VectorXd Gu = problem.reduced_gradient(u);
      double tr = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        trial.values = clamp_vec(u.values - tr * Gu, lo, hi);
        apply_trace(mesh, trial);
        e_trial = energy(problem.ctx(), trial);
        if (e_trial <= e_u + 1e-4 * Gu.dot(trial.values - u.values)) break;
        tr *= 0.5;
      }
      t = tr;
    }

    u_prev = u;
    u = trial;
    e_u = e_trial;
    last_step = t;
  }

  report.solution = u;
  report.iterations = iter;
  report.final_energy = e_u;
  report.kkt_residual = residual;

  // Active sets are identified within a band of width tol; clamped entries
  // sit exactly on the obstacle, the band absorbs iterates stopped one step
  // short of it.
  const double band = spec.tol;
  for (int i = 0; i < mesh.interior_count(); ++i) {
    if (u.values[i] - lo[i] <= band)
      report.active_lower.push_back(i);
    else if (hi[i] - u.values[i] <= band)
      report.active_upper.push_back(i);
    else
      report.inactive.push_back(i);
  }
  return report;
}

double vi_residual(const Problem& problem, const GridFunction& u, const GridFunction& v) {
  const auto& mesh = problem.mesh();
  if (u.mesh_id != mesh.id || v.mesh_id != mesh.id)
    throw SolverError("vi_residual: arguments live on another mesh");
  const double slack = 1e-9;
  const auto feasible = [&](const GridFunction& g) {
    return ((g.values - problem.lower().values).array() >= -slack).all() &&
           ((problem.upper().values - g.values).array() >= -slack).all();
  };
  if (!feasible(u)) throw SolverError("vi_residual: infeasible argument u");
  if (!feasible(v)) throw SolverError("vi_residual: infeasible argument v");

  GridFunction d = v;
  d.values = v.values - u.values;
  d.boundary_values = v.boundary_values - u.boundary_values;
  const double a = form_a(problem.ctx(), u, d);
  double load = 0.0;
  for (int i = 0; i < mesh.interior_count(); ++i)
    load += mesh.interior_weights[i] * problem.f_vals().values[i] * d.values[i];
  return a - load;
}

LSReport lewy_stampacchia_report(const Problem& problem, const SolveReport& report) {
  const auto& mesh = problem.mesh();
  const auto& ctx = problem.ctx();
  const GridFunction Lu = discrete_operator(ctx, report.solution);
  const GridFunction L1 = discrete_operator(ctx, problem.lower());
  const GridFunction L2 = discrete_operator(ctx, problem.upper());

  LSReport ls;
  double fmax = 0.0;
  for (int i = 0; i < mesh.interior_count(); ++i)
    fmax = std::max(fmax, std::fabs(problem.f_vals().values[i]));
  ls.tol_ls = 1e-3 * fmax;

  const double band = problem.spec().tol;
  std::vector<char> cls(static_cast<std::size_t>(mesh.interior_count()), 'i');
  for (int i : report.active_lower) cls[static_cast<std::size_t>(i)] = 'l';
  for (int i : report.active_upper) cls[static_cast<std::size_t>(i)] = 'u';

  ls.rows.reserve(static_cast<std::size_t>(mesh.interior_count()));
  for (int i = 0; i < mesh.interior_count(); ++i) {
    LSRow row;
    row.node = i;
    row.L_u = Lu.values[i];
    row.L_phi1 = L1.values[i];
    row.L_phi2 = L2.values[i];
    row.f = problem.f_vals().values[i];
    row.cls = cls[static_cast<std::size_t>(i)];
    if (problem.upper().values[i] - problem.lower().values[i] <= 2.0 * band) row.cls = 'e';
    const double fh = 0.5 * row.f;
    row.printed_ok = std::max(row.L_phi2, fh) - ls.tol_ls <= row.L_u &&
                     row.L_u <= std::min(row.L_phi1, fh) + ls.tol_ls;
    row.mirrored_ok = std::min(row.L_phi2, fh) - ls.tol_ls <= row.L_u &&
                      row.L_u <= std::max(row.L_phi1, fh) + ls.tol_ls;
    switch (row.cls) {
      case 'i':
        ++ls.count_inactive;
        ls.max_inactive_stationarity =
            std::max(ls.max_inactive_stationarity, std::fabs(row.L_u - fh));
        break;
      case 'l': ++ls.count_lower; break;
      case 'u': ++ls.count_upper; break;
      default: ++ls.count_equality; break;
    }
    if (row.printed_ok) ++ls.printed_hold_count;
    if (row.mirrored_ok) ++ls.mirrored_hold_count;
    ls.rows.push_back(row);
  }
  return ls;
}

}  // namespace fraktal
