#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace crossvec::fem {

enum class CellKind { triangle, quadrilateral };

const char* to_string(CellKind kind);
/// Accepts "triangle"/"tri" and "quadrilateral"/"quad".
CellKind parse_cell_kind(std::string_view text);

using Point = std::array<double, 2>;

struct ReferenceCell {
  CellKind kind = CellKind::triangle;

  static constexpr int dimension = 2;

  int num_vertices() const noexcept { return kind == CellKind::triangle ? 3 : 4; }
  /// 1/2 for the unit right triangle, 1 for the unit square.
  double measure() const noexcept { return kind == CellKind::triangle ? 0.5 : 1.0; }
  /// (0,0), (1,0), (0,1) for triangles; counter-clockwise unit square for quads.
  std::vector<Point> vertices() const;
  /// Edges as local vertex pairs (lower index first), in canonical order.
  std::vector<std::array<int, 2>> edges() const;
  bool contains(const Point& p, double tol = 1e-14) const;

  friend bool operator==(const ReferenceCell&, const ReferenceCell&) = default;
};

/// Exponents (a, b) of the monomials spanning P_k or Q_k.
std::vector<std::array<int, 2>> monomial_exponents(CellKind kind, int degree);

/// Equispaced Lagrange element. The nodal basis is phi_j(x) = sum_m
/// coefficients[m * ndof_scalar + j] * s^a_m t^b_m with s = 2x - 1,
/// t = 2y - 1.
struct ReferenceElement {
  ReferenceCell cell;
  int degree = 1;
  int value_size = 1;
  std::vector<Point> nodes;
  int ndof_scalar = 0;
  std::vector<double> coefficients;

  int ndofs() const noexcept { return ndof_scalar * value_size; }
  /// Number of nodes on each edge interior and in the cell interior.
  int nodes_per_edge() const noexcept { return degree - 1; }
  int interior_nodes() const noexcept { return ndof_scalar - cell.num_vertices() - nodes_per_edge() * static_cast<int>(cell.edges().size()); }

  std::vector<double> evaluate(const Point& p) const;
  /// Row-major [ndof_scalar][2].
  std::vector<double> evaluate_gradients(const Point& p) const;

  friend bool operator==(const ReferenceElement&, const ReferenceElement&) = default;
};

inline constexpr int kMaxElementDegree = 4;

/// Nodes are ordered vertices, then edges (each from its lower to its higher
/// local vertex), then interior nodes with x varying fastest.
ReferenceElement reference_element(ReferenceCell cell, int degree, int value_size = 1);

struct QuadratureRule {
  ReferenceCell cell;
  std::vector<Point> points;
  std::vector<double> weights;
  int exactness_degree = 0;

  std::size_t size() const noexcept { return points.size(); }
};

/// Largest polynomial degree a triangle rule is available for.
int max_quadrature_degree(CellKind kind);

QuadratureRule quadrature_rule(ReferenceCell cell, int required_degree);

/// Gauss-Legendre points and weights on [0, 1].
void gauss_legendre(int npoints, std::vector<double>& points, std::vector<double>& weights);

struct Tabulation {
  int npoints = 0;
  int ndof = 0;
  std::vector<double> values;  // [npoints][ndof]
  std::vector<double> grads;   // [npoints][ndof][2]

  double value(int q, int i) const { return values[static_cast<std::size_t>(q) * ndof + i]; }
  double grad(int q, int i, int d) const { return grads[(static_cast<std::size_t>(q) * ndof + i) * 2 + d]; }
};

Tabulation tabulate(const ReferenceElement& element, const QuadratureRule& rule);
Tabulation tabulate(const ReferenceElement& element, const std::vector<Point>& points);

} // namespace crossvec::fem
