#include "crossvec/harness/mesh.hpp"

#include "crossvec/error.hpp"

#include <map>

namespace crossvec::harness {

Mesh build_mesh(fem::CellKind kind, int nx, int ny)
{
  if (nx < 1 || ny < 1) {
    throw InvalidArgument("mesh needs at least one cell in each direction");
  }
  Mesh m;
  m.kind = kind;
  m.nx = nx;
  m.ny = ny;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.coords.push_back(static_cast<double>(i) / nx);
      m.coords.push_back(static_cast<double>(j) / ny);
    }
  }
  auto v = [&](int i, int j) { return static_cast<std::int32_t>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::int32_t v00 = v(i, j);
      std::int32_t v10 = v(i + 1, j);
      std::int32_t v11 = v(i + 1, j + 1);
      std::int32_t v01 = v(i, j + 1);
      if (kind == fem::CellKind::triangle) {
        m.cell2vert.insert(m.cell2vert.end(), {v00, v10, v11, v00, v11, v01});
      } else {
        m.cell2vert.insert(m.cell2vert.end(), {v00, v10, v11, v01});
      }
    }
  }
  return m;
}

namespace {

template <class Fn>
void for_each_edge(const Mesh& mesh, Fn fn)
{
  fem::ReferenceCell cell{mesh.kind};
  const auto edges = cell.edges();
  const int nv = mesh.vertices_per_cell();
  for (int c = 0; c < mesh.ncells(); ++c) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      std::int32_t a = mesh.cell2vert[c * nv + edges[e][0]];
      std::int32_t b = mesh.cell2vert[c * nv + edges[e][1]];
      fn(c, static_cast<int>(e), a, b);
    }
  }
}

} // namespace

int count_edges(const Mesh& mesh)
{
  std::map<std::pair<int, int>, int> ids;
  for_each_edge(mesh, [&](int, int, std::int32_t a, std::int32_t b) {
    ids.emplace(std::minmax(a, b), 0);
  });
  return static_cast<int>(ids.size());
}

DofMap build_dof_map(const Mesh& mesh, const fem::ReferenceElement& element)
{
  if (element.cell.kind != mesh.kind) {
    throw InvalidArgument(std::string("element is defined on a ") + fem::to_string(element.cell.kind) +
                          " but the mesh has " + fem::to_string(mesh.kind) + " cells");
  }
  const int k = element.degree;
  const int nv = mesh.vertices_per_cell();
  const int nd = element.ndof_scalar;
  const int per_edge = k - 1;
  const int interior = element.interior_nodes();
  const int nedges_local = static_cast<int>(element.cell.edges().size());

  std::map<std::pair<int, int>, int> edge_ids;
  for_each_edge(mesh, [&](int, int, std::int32_t a, std::int32_t b) {
    edge_ids.emplace(std::minmax(a, b), static_cast<int>(edge_ids.size()));
  });
  // The id argument is the size before insertion, so ids follow first appearance.
  const int edge_base = mesh.nvertices();
  const int cell_base = edge_base + static_cast<int>(edge_ids.size()) * per_edge;

  DofMap d;
  d.element = element;
  d.ndofs_global = cell_base + mesh.ncells() * interior;
  d.cell2dof.assign(static_cast<std::size_t>(mesh.ncells()) * nd, -1);
  for (int c = 0; c < mesh.ncells(); ++c) {
    std::int32_t* dofs = &d.cell2dof[static_cast<std::size_t>(c) * nd];
    for (int i = 0; i < nv; ++i) {
      dofs[i] = mesh.cell2vert[c * nv + i];
    }
  }
  for_each_edge(mesh, [&](int c, int e, std::int32_t a, std::int32_t b) {
    int id = edge_ids.at(std::minmax(a, b));
    std::int32_t* dofs = &d.cell2dof[static_cast<std::size_t>(c) * nd + nv + e * per_edge];
    for (int t = 0; t < per_edge; ++t) {
      int along = a < b ? t : per_edge - 1 - t;
      dofs[t] = edge_base + id * per_edge + along;
    }
  });
  for (int c = 0; c < mesh.ncells(); ++c) {
    std::int32_t* dofs = &d.cell2dof[static_cast<std::size_t>(c) * nd + nv + nedges_local * per_edge];
    for (int t = 0; t < interior; ++t) {
      dofs[t] = cell_base + c * interior + t;
    }
  }
  return d;
}

} // namespace crossvec::harness
