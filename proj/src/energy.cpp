#include "fraktal/energy.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "fraktal/errors.hpp"

namespace fraktal {

namespace {

constexpr int kTileSize = 128;
constexpr double kOverflowLimit = 1e300;
// Kernel matrices above this byte budget are recomputed per pair instead.
constexpr std::size_t kKernelBudgetBytes = 768ull << 20;

// |t|^k for small integer k, by binary exponentiation.
double pow_uint(double a, int k) {
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= a;
    a *= a;
    k >>= 1;
  }
  return r;
}

inline double abs_pow(double t, double p, int p_int) {
  const double a = std::fabs(t);
  return p_int >= 0 ? pow_uint(a, p_int) : std::pow(a, p);
}

// |t|^{p-2} t
inline double signed_pow(double t, double p, int p_int) {
  const double a = std::fabs(t);
  return (p_int >= 0 ? pow_uint(a, p_int - 2) : std::pow(a, p - 2.0)) * t;
}

struct TileTask {
  int a, b;
};

std::vector<TileTask> make_tasks(const std::vector<int>& starts) {
  const int nt = static_cast<int>(starts.size()) - 1;
  std::vector<TileTask> tasks;
  tasks.reserve(static_cast<std::size_t>(nt) * (nt + 1) / 2);
  for (int a = 0; a < nt; ++a)
    for (int b = a; b < nt; ++b) tasks.push_back({a, b});
  return tasks;
}

// Runs fn(task_index) over [0, n) on `workers` threads. Output determinism is
// the callers' concern: fn must write only to its own task slot.
template <typename Fn>
void run_tasks(int n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (int t = 0; t < n; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= n) return;
      fn(t);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  pool.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline double kernel_value(const EnergyContext& ctx, int i, int j) {
  if (ctx.kernel_cached) return ctx.kernel(i, j);
  const double d2 = (ctx.scaled_nodes.col(i) - ctx.scaled_nodes.col(j)).squaredNorm();
  return std::pow(d2, -0.5 * ctx.kernel_exponent);
}

void check_partial(double v) {
  if (!std::isfinite(v) || std::fabs(v) > kOverflowLimit)
    throw EnergyError("energy overflow: partial sum left [-1e300, 1e300]");
}

void check_on_mesh(const EnergyContext& ctx, const GridFunction& u, const char* op) {
  if (u.mesh_id != ctx.mesh->id || u.values.size() != ctx.mesh->interior_count() ||
      u.boundary_values.size() != ctx.mesh->boundary_count())
    throw EnergyError(std::string(op) + ": grid function does not live on the context mesh");
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FRAKTAL_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

EnergyContext make_energy_context(const DomainMesh& mesh, double s, double p,
                                  const GridFunction& f_field, const GridFunction& b_field,
                                  int workers, double delta_override) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("energy context requires s in (0,1)");
  if (!(2.0 < s * p && s * p < p))
    throw ConfigError("energy context requires 2 < s*p < p (got s=" + std::to_string(s) +
                      ", p=" + std::to_string(p) + ")");
  if (f_field.mesh_id != mesh.id || b_field.mesh_id != mesh.id)
    throw ConfigError("energy context: coefficient fields sampled on another mesh");

  EnergyContext ctx;
  ctx.mesh = &mesh;
  ctx.s = s;
  ctx.p = p;
  ctx.delta_n = delta_override >= 0.0 ? delta_override : mesh.delta_n;
  ctx.workers = resolve_workers(workers);
  ctx.f_vals = f_field.values;
  ctx.kernel_exponent = 2.0 + s * p;
  ctx.p_int = (p == std::floor(p) && p <= 64.0) ? static_cast<int>(p) : -1;

  ctx.boundary_coef.resize(mesh.boundary_count());
  for (int k = 0; k < mesh.boundary_count(); ++k) {
    const double bk = b_field.boundary_values[k];
    if (!(bk > 0.0))
      throw ConfigError("energy context: coefficient b must be positive at every boundary node "
                        "(node " + std::to_string(k) + " has b = " + std::to_string(bk) + ")");
    ctx.boundary_coef[k] = ctx.delta_n * mesh.boundary_weights[k] * bk;
  }

  const int m = mesh.interior_count();
  ctx.w = mesh.interior_weights;
  ctx.scaled_nodes.resize(2, m);
  const double inv_diam = 1.0 / koch_diameter();
  for (int i = 0; i < m; ++i)
    ctx.scaled_nodes.col(i) = mesh.interior_nodes[static_cast<std::size_t>(i)] * inv_diam;

  for (int t = 0; t < m; t += kTileSize) ctx.tile_starts.push_back(t);
  ctx.tile_starts.push_back(m);

  const std::size_t bytes = static_cast<std::size_t>(m) * static_cast<std::size_t>(m) * 8;
  if (bytes <= kKernelBudgetBytes) {
    ctx.kernel.resize(m, m);
    const double half_exp = -0.5 * ctx.kernel_exponent;
    run_tasks(static_cast<int>(ctx.tile_starts.size()) - 1, ctx.workers, [&](int t) {
      for (int i = ctx.tile_starts[static_cast<std::size_t>(t)];
           i < ctx.tile_starts[static_cast<std::size_t>(t) + 1]; ++i) {
        ctx.kernel(i, i) = 0.0;
        for (int j = i + 1; j < m; ++j) {
          const double d2 = (ctx.scaled_nodes.col(i) - ctx.scaled_nodes.col(j)).squaredNorm();
          const double k = std::pow(d2, half_exp);
          ctx.kernel(i, j) = k;
          ctx.kernel(j, i) = k;
        }
      }
    });
    ctx.kernel_cached = true;
  }
  return ctx;
}

double energy(const EnergyContext& ctx, const GridFunction& u) {
  check_on_mesh(ctx, u, "energy");
  const auto& starts = ctx.tile_starts;
  const auto tasks = make_tasks(starts);
  std::vector<double> partial(tasks.size(), 0.0);

  run_tasks(static_cast<int>(tasks.size()), ctx.workers, [&](int t) {
    const auto [a, b] = tasks[static_cast<std::size_t>(t)];
    double sum = 0.0;
    for (int i = starts[static_cast<std::size_t>(a)]; i < starts[static_cast<std::size_t>(a) + 1]; ++i) {
      const double ui = u.values[i];
      const double wi = ctx.w[i];
      const int j0 = std::max(i + 1, starts[static_cast<std::size_t>(b)]);
      for (int j = j0; j < starts[static_cast<std::size_t>(b) + 1]; ++j) {
        sum += wi * ctx.w[j] * abs_pow(ui - u.values[j], ctx.p, ctx.p_int) * kernel_value(ctx, i, j);
      }
    }
    check_partial(sum);
    partial[static_cast<std::size_t>(t)] = sum;
  });

  double pair_sum = 0.0;
  for (const double v : partial) pair_sum += v;  // fixed task order
  check_partial(pair_sum);

  double load = 0.0;
  for (int i = 0; i < u.values.size(); ++i) load += ctx.w[i] * ctx.f_vals[i] * u.values[i];

  double boundary = 0.0;
  for (int k = 0; k < u.boundary_values.size(); ++k)
    boundary += ctx.boundary_coef[k] * abs_pow(u.boundary_values[k], ctx.p, ctx.p_int);

  const double total = (2.0 / ctx.p) * pair_sum - load + boundary / ctx.p;
  check_partial(total);
  return total;
}

namespace {

// Shared pair scan for gradient / operator / form_a. Emits phi = |du|^{p-2} du
// times the kernel for every i < j pair into per-task tile buffers.
struct PairAccumulator {
  std::vector<double> tile_a, tile_b;  // contributions indexed within tile
};

}  // namespace

GridFunction discrete_operator(const EnergyContext& ctx, const GridFunction& u) {
  check_on_mesh(ctx, u, "discrete_operator");
  const auto& starts = ctx.tile_starts;
  const auto tasks = make_tasks(starts);
  std::vector<PairAccumulator> acc(tasks.size());

  run_tasks(static_cast<int>(tasks.size()), ctx.workers, [&](int t) {
    const auto [a, b] = tasks[static_cast<std::size_t>(t)];
    const int a0 = starts[static_cast<std::size_t>(a)], a1 = starts[static_cast<std::size_t>(a) + 1];
    const int b0 = starts[static_cast<std::size_t>(b)], b1 = starts[static_cast<std::size_t>(b) + 1];
    auto& slot = acc[static_cast<std::size_t>(t)];
    slot.tile_a.assign(static_cast<std::size_t>(a1 - a0), 0.0);
    slot.tile_b.assign(static_cast<std::size_t>(b1 - b0), 0.0);
    for (int i = a0; i < a1; ++i) {
      const double ui = u.values[i];
      const double wi = ctx.w[i];
      double li = 0.0;  // contribution to L_i from this tile pair
      const int j0 = std::max(i + 1, b0);
      for (int j = j0; j < b1; ++j) {
        const double phi = signed_pow(ui - u.values[j], ctx.p, ctx.p_int) * kernel_value(ctx, i, j);
        li += ctx.w[j] * phi;
        slot.tile_b[static_cast<std::size_t>(j - b0)] -= wi * phi;
      }
      slot.tile_a[static_cast<std::size_t>(i - a0)] += li;
      check_partial(li);
    }
  });

  GridFunction out = GridFunction::zeros(*ctx.mesh);
  // Fixed-order reduction over tasks keeps the result worker-count invariant.
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto [a, b] = tasks[t];
    const int a0 = starts[static_cast<std::size_t>(a)];
    const int b0 = starts[static_cast<std::size_t>(b)];
    for (std::size_t k = 0; k < acc[t].tile_a.size(); ++k)
      out.values[a0 + static_cast<int>(k)] += acc[t].tile_a[k];
    for (std::size_t k = 0; k < acc[t].tile_b.size(); ++k)
      out.values[b0 + static_cast<int>(k)] += acc[t].tile_b[k];
  }
  for (int i = 0; i < out.values.size(); ++i) check_partial(out.values[i]);
  return out;
}

GridFunction gradient(const EnergyContext& ctx, const GridFunction& u) {
  GridFunction g = discrete_operator(ctx, u);
  for (int i = 0; i < g.values.size(); ++i)
    g.values[i] = 2.0 * ctx.w[i] * g.values[i] - ctx.w[i] * ctx.f_vals[i];
  for (int k = 0; k < g.boundary_values.size(); ++k)
    g.boundary_values[k] = ctx.boundary_coef[k] * signed_pow(u.boundary_values[k], ctx.p, ctx.p_int);
  return g;
}

double form_a(const EnergyContext& ctx, const GridFunction& u, const GridFunction& v) {
  check_on_mesh(ctx, u, "form_a");
  check_on_mesh(ctx, v, "form_a");
  const auto& starts = ctx.tile_starts;
  const auto tasks = make_tasks(starts);
  std::vector<double> partial(tasks.size(), 0.0);

  run_tasks(static_cast<int>(tasks.size()), ctx.workers, [&](int t) {
    const auto [a, b] = tasks[static_cast<std::size_t>(t)];
    double sum = 0.0;
    for (int i = starts[static_cast<std::size_t>(a)]; i < starts[static_cast<std::size_t>(a) + 1]; ++i) {
      const double ui = u.values[i];
      const double vi = v.values[i];
      const double wi = ctx.w[i];
      const int j0 = std::max(i + 1, starts[static_cast<std::size_t>(b)]);
      for (int j = j0; j < starts[static_cast<std::size_t>(b) + 1]; ++j) {
        sum += wi * ctx.w[j] * signed_pow(ui - u.values[j], ctx.p, ctx.p_int) *
               (vi - v.values[j]) * kernel_value(ctx, i, j);
      }
    }
    check_partial(sum);
    partial[static_cast<std::size_t>(t)] = sum;
  });

  double pair_sum = 0.0;
  for (const double s : partial) pair_sum += s;
  check_partial(pair_sum);

  double boundary = 0.0;
  for (int k = 0; k < u.boundary_values.size(); ++k)
    boundary += ctx.boundary_coef[k] * signed_pow(u.boundary_values[k], ctx.p, ctx.p_int) *
                v.boundary_values[k];

  const double total = 2.0 * pair_sum + boundary;
  check_partial(total);
  return total;
}

}  // namespace fraktal
