#include "fraktal/mesh.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "fraktal/errors.hpp"

namespace fraktal {

namespace {

std::atomic<std::uint64_t> g_mesh_counter{1};

double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& p) const {
    return std::hash<std::int64_t>()(p.first * 0x9e3779b97f4a7c15LL ^ p.second);
  }
};

}  // namespace

GridFunction GridFunction::zeros(const DomainMesh& mesh) {
  GridFunction g;
  g.mesh_id = mesh.id;
  g.values = Eigen::VectorXd::Zero(mesh.interior_count());
  g.boundary_values = Eigen::VectorXd::Zero(mesh.boundary_count());
  return g;
}

GridFunction GridFunction::constant(const DomainMesh& mesh, double c) {
  GridFunction g;
  g.mesh_id = mesh.id;
  g.values = Eigen::VectorXd::Constant(mesh.interior_count(), c);
  g.boundary_values = Eigen::VectorXd::Constant(mesh.boundary_count(), c);
  return g;
}

DomainMesh build_mesh(const PrefractalDomain& domain, double h, int boundary_subdiv) {
  const int n = domain.curve.level;
  if (h <= 0.0) throw MeshError("mesh spacing must be positive");
  if (h > domain.curve.segment_length + 1e-15)
    throw MeshError("mesh spacing too coarse: h must not exceed 3^-n = " +
                    std::to_string(domain.curve.segment_length));
  if (boundary_subdiv < 1) throw MeshError("boundary_subdiv must be >= 1");

  DomainMesh mesh;
  mesh.id = g_mesh_counter.fetch_add(1);
  mesh.level = n;
  mesh.h = h;
  mesh.boundary_subdiv = boundary_subdiv;
  mesh.delta_n = domain.curve.delta_n();
  mesh.area = domain.area;
  mesh.perimeter = domain.curve.perimeter();

  // Bounding box of the curve, in grid index space.
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Point2& v : domain.curve.vertices) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  const auto lo_index = [h](double lo) {
    return static_cast<std::int64_t>(std::floor(lo / h)) - 1;
  };
  const auto hi_index = [h](double hi) {
    return static_cast<std::int64_t>(std::ceil(hi / h)) + 1;
  };

  for (std::int64_t j = lo_index(ymin); j <= hi_index(ymax); ++j) {
    for (std::int64_t i = lo_index(xmin); i <= hi_index(xmax); ++i) {
      const Point2 p((static_cast<double>(i) + 0.5) * h, (static_cast<double>(j) + 0.5) * h);
      if (contains(domain.curve, p)) {
        mesh.interior_nodes.push_back(p);
        mesh.grid_coords.emplace_back(i, j);
      }
    }
  }
  if (mesh.interior_nodes.empty())
    throw MeshError("empty mesh: no interior node found at spacing h = " + std::to_string(h));
  mesh.interior_weights = Eigen::VectorXd::Constant(mesh.interior_count(), h * h);

  // Boundary quadrature nodes: midpoints of equal pieces of each segment.
  const auto& verts = domain.curve.vertices;
  const std::size_t m = verts.size();
  const double arc = domain.curve.segment_length / static_cast<double>(boundary_subdiv);
  mesh.boundary_nodes.reserve(m * boundary_subdiv);
  for (std::size_t sidx = 0; sidx < m; ++sidx) {
    const Point2& a = verts[sidx];
    const Point2& b = verts[(sidx + 1) % m];
    for (int k = 0; k < boundary_subdiv; ++k) {
      const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(boundary_subdiv);
      mesh.boundary_nodes.push_back(a + t * (b - a));
    }
  }
  mesh.boundary_weights = Eigen::VectorXd::Constant(mesh.boundary_count(), arc);

  // Nearest-interior anchor for every boundary node (trace surrogate).
  mesh.boundary_anchor.resize(mesh.boundary_count());
  for (int k = 0; k < mesh.boundary_count(); ++k) {
    const Point2& q = mesh.boundary_nodes[static_cast<std::size_t>(k)];
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < mesh.interior_count(); ++i) {
      const double d2 = (mesh.interior_nodes[static_cast<std::size_t>(i)] - q).squaredNorm();
      if (d2 < best_d2) {  // strict: ties resolve to the lowest index
        best_d2 = d2;
        best = i;
      }
    }
    mesh.boundary_anchor[static_cast<std::size_t>(k)] = best;
  }
  return mesh;
}

GridFunction sample_field(const ScalarField& field, const DomainMesh& mesh) {
  GridFunction g;
  g.mesh_id = mesh.id;
  g.values.resize(mesh.interior_count());
  g.boundary_values.resize(mesh.boundary_count());
  const auto eval_at = [&](const Point2& p, const char* kind, int idx) {
    try {
      return field.eval(p);
    } catch (const EvalDomainError& e) {
      std::ostringstream os;
      os << e.what() << " at " << kind << " node " << idx << " (" << p.x() << ", " << p.y() << ")";
      throw EvalDomainError(os.str(), e.subexpr, p.x(), p.y());
    }
  };
  for (int i = 0; i < mesh.interior_count(); ++i)
    g.values[i] = eval_at(mesh.interior_nodes[static_cast<std::size_t>(i)], "interior", i);
  for (int k = 0; k < mesh.boundary_count(); ++k)
    g.boundary_values[k] = eval_at(mesh.boundary_nodes[static_cast<std::size_t>(k)], "boundary", k);
  return g;
}

void apply_trace(const DomainMesh& mesh, GridFunction& u) {
  if (u.mesh_id != mesh.id) throw MeshError("apply_trace: grid function belongs to another mesh");
  if (u.boundary_values.size() != mesh.boundary_count())
    u.boundary_values.resize(mesh.boundary_count());
  for (int k = 0; k < mesh.boundary_count(); ++k)
    u.boundary_values[k] = u.values[mesh.boundary_anchor[static_cast<std::size_t>(k)]];
}

namespace {

std::unordered_map<std::pair<std::int64_t, std::int64_t>, int, PairHash> index_map(
    const DomainMesh& mesh) {
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, int, PairHash> map;
  map.reserve(mesh.grid_coords.size());
  for (int i = 0; i < mesh.interior_count(); ++i)
    map.emplace(mesh.grid_coords[static_cast<std::size_t>(i)], i);
  return map;
}

void check_shared_grid(const DomainMesh& a, const DomainMesh& b) {
  if (a.h != b.h)
    throw MeshError("mesh mismatch: grid pitches differ (" + std::to_string(a.h) + " vs " +
                    std::to_string(b.h) + ")");
}

}  // namespace

GridFunction restrict_to(const GridFunction& fine, const DomainMesh& fine_mesh,
                         const DomainMesh& coarse_mesh) {
  if (fine.mesh_id != fine_mesh.id)
    throw MeshError("restrict_to: grid function belongs to another mesh");
  check_shared_grid(fine_mesh, coarse_mesh);
  const auto map = index_map(fine_mesh);
  GridFunction out = GridFunction::zeros(coarse_mesh);
  for (int i = 0; i < coarse_mesh.interior_count(); ++i) {
    const auto it = map.find(coarse_mesh.grid_coords[static_cast<std::size_t>(i)]);
    if (it == map.end())
      throw MeshError("restrict_to: coarse node " + std::to_string(i) +
                      " has no matching fine node (meshes not nested)");
    out.values[i] = fine.values[it->second];
  }
  apply_trace(coarse_mesh, out);
  return out;
}

GridFunction inject(const GridFunction& coarse, const DomainMesh& coarse_mesh,
                    const DomainMesh& fine_mesh) {
  if (coarse.mesh_id != coarse_mesh.id)
    throw MeshError("inject: grid function belongs to another mesh");
  check_shared_grid(coarse_mesh, fine_mesh);
  const auto map = index_map(fine_mesh);
  GridFunction out = GridFunction::zeros(fine_mesh);
  for (int i = 0; i < coarse_mesh.interior_count(); ++i) {
    const auto it = map.find(coarse_mesh.grid_coords[static_cast<std::size_t>(i)]);
    if (it != map.end()) out.values[it->second] = coarse.values[i];
  }
  return out;
}

}  // namespace fraktal
