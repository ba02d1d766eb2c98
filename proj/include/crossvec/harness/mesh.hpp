#pragma once

#include "crossvec/fem/element.hpp"

#include <cstdint>
#include <vector>

namespace crossvec::harness {

/// Structured mesh of the unit square.
struct Mesh {
  fem::CellKind kind = fem::CellKind::triangle;
  int nx = 0;
  int ny = 0;
  std::vector<double> coords;           // [nvertices][2]
  std::vector<std::int32_t> cell2vert;  // [ncells][vertices_per_cell]

  int vertices_per_cell() const noexcept { return kind == fem::CellKind::triangle ? 3 : 4; }
  int nvertices() const noexcept { return static_cast<int>(coords.size() / 2); }
  int ncells() const noexcept { return static_cast<int>(cell2vert.size() / vertices_per_cell()); }
};

/// Vertex (i, j) has index j * (nx + 1) + i. Each grid square becomes the
/// quadrilateral (v00, v10, v11, v01) or the triangles (v00, v10, v11) and
/// (v00, v11, v01), all positively oriented.
Mesh build_mesh(fem::CellKind kind, int nx, int ny);

struct DofMap {
  fem::ReferenceElement element;
  std::vector<std::int32_t> cell2dof;  // [ncells][ndof_scalar]
  /// Number of scalar nodes; a function has ndofs_global * value_size values.
  int ndofs_global = 0;

  int ndof_local() const noexcept { return element.ndof_scalar; }
  int ncells() const noexcept { return static_cast<int>(cell2dof.size() / element.ndof_scalar); }
};

/// Global numbering: vertices, then edges in order of first appearance (each
/// edge's nodes run from its lower to its higher global vertex), then cell
/// interiors.
DofMap build_dof_map(const Mesh& mesh, const fem::ReferenceElement& element);

/// Number of distinct edges of the mesh.
int count_edges(const Mesh& mesh);

} // namespace crossvec::harness
