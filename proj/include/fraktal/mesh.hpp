#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fraktal/field_expr.hpp"
#include "fraktal/geometry.hpp"

namespace fraktal {

// Collocation mesh of a pre-fractal domain: interior nodes are the centers of
// a globally anchored square grid (origin (0,0), pitch h) that pass the
// point-in-polygon test, each carrying area weight h^2; boundary nodes are
// midpoints of `boundary_subdiv` equal pieces of every curve segment, each
// carrying arc weight segment_length / boundary_subdiv.
//
// The grid anchor is global, so interior node sets are nested across levels
// whenever the pitch is shared.
struct DomainMesh {
  std::uint64_t id = 0;  // identity used to pair GridFunctions with meshes
  int level = 0;
  double h = 0.0;
  int boundary_subdiv = 1;
  double delta_n = 1.0;  // (3/4)^n unless overridden
  double area = 0.0;     // shoelace area of the domain
  double perimeter = 0.0;

  std::vector<Point2> interior_nodes;
  std::vector<std::pair<std::int64_t, std::int64_t>> grid_coords;  // (i,j): node = ((i+.5)h,(j+.5)h)
  Eigen::VectorXd interior_weights;  // h^2 per node

  std::vector<Point2> boundary_nodes;
  Eigen::VectorXd boundary_weights;  // arc length per node
  std::vector<int> boundary_anchor;  // nearest interior node per boundary node

  int interior_count() const { return static_cast<int>(interior_nodes.size()); }
  int boundary_count() const { return static_cast<int>(boundary_nodes.size()); }
};

// Nodal values on a mesh: one entry per interior node plus one per boundary
// node. The boundary block either holds trace samples (solver use) or
// pointwise field samples, depending on how the function was produced.
struct GridFunction {
  std::uint64_t mesh_id = 0;
  Eigen::VectorXd values;           // interior nodes
  Eigen::VectorXd boundary_values;  // boundary nodes

  static GridFunction zeros(const DomainMesh& mesh);
  static GridFunction constant(const DomainMesh& mesh, double c);
};

// Builds the mesh. Preconditions: h <= 3^-n (else MeshError
// "spacing too coarse"), boundary_subdiv >= 1. Throws MeshError if no
// interior node is found.
DomainMesh build_mesh(const PrefractalDomain& domain, double h, int boundary_subdiv);

// Pointwise evaluation of a field at all interior and boundary nodes.
// Evaluation errors are rethrown with the node location attached.
GridFunction sample_field(const ScalarField& field, const DomainMesh& mesh);

// Copies u's interior value at each boundary node's nearest interior anchor
// into the boundary block.
void apply_trace(const DomainMesh& mesh, GridFunction& u);

// Restriction of a fine-level function onto a coarse mesh sharing the global
// grid anchor and pitch: copies values at coinciding nodes. Throws MeshError
// if the pitches differ or a coarse node is missing from the fine mesh.
GridFunction restrict_to(const GridFunction& fine, const DomainMesh& fine_mesh,
                         const DomainMesh& coarse_mesh);

// Embedding of a coarse function into a fine mesh: matching nodes copied,
// all other entries zero.
GridFunction inject(const GridFunction& coarse, const DomainMesh& coarse_mesh,
                    const DomainMesh& fine_mesh);

}  // namespace fraktal
