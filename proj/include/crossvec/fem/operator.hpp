#pragma once

#include "crossvec/fem/element.hpp"
#include "crossvec/ir/kernel.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace crossvec::fem {

enum class Form { mass, helmholtz, laplacian, elasticity };

const char* to_string(Form form);
Form parse_form(std::string_view text);
/// Value size implied by the form: 1 for mass and helmholtz, 2 otherwise.
int form_value_size(Form form);

/// A linear form over a Lagrange space. The coefficient and the test
/// function live in `element`; the coordinate field in `geometry` (degree 1).
struct OperatorSpec {
  Form form = Form::mass;
  ReferenceElement element;
  ReferenceElement geometry;

  CellKind cell() const noexcept { return element.cell.kind; }
  int degree() const noexcept { return element.degree; }
};

/// Checks the value-size and geometry constraints; throws InvalidArgument.
void check_operator(const OperatorSpec& spec);

OperatorSpec make_operator(Form form, CellKind cell, int degree);

/// Polynomial degree the quadrature must integrate exactly: 2k, plus 2 on
/// quadrilaterals for the bilinear Jacobian.
int quadrature_degree(const OperatorSpec& spec);

/// Local kernel with arguments A (output, incremented), coords (nv x 2) and
/// w_0 (coefficient dofs).
ir::LoopKernel build_local_kernel(const OperatorSpec& spec, const QuadratureRule& rule);

/// Straight-line evaluation of the same integral, used as an independent
/// reference. Returns the local residual (not accumulated).
std::vector<double> evaluate_local(const OperatorSpec& spec, const QuadratureRule& rule,
                                   const Tabulation& basis, const Tabulation& geometry,
                                   std::span<const double> coords, std::span<const double> w);

} // namespace crossvec::fem
