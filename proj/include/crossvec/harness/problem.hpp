#pragma once

#include "crossvec/codegen/jit.hpp"
#include "crossvec/fem/operator.hpp"
#include "crossvec/harness/mesh.hpp"
#include "crossvec/ir/interpret.hpp"
#include "crossvec/transform/wrapper.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace crossvec::harness {

/// Dof values of a (possibly vector-valued) function, node-major.
using FunctionData = std::vector<double>;

/// Everything needed to assemble one operator on one mesh.
struct Problem {
  fem::OperatorSpec spec;
  fem::QuadratureRule rule;
  Mesh mesh;
  DofMap dofmap;
  FunctionData u;
  std::uint64_t seed = 0;

  std::size_t function_size() const noexcept
  {
    return static_cast<std::size_t>(dofmap.ndofs_global) * spec.element.value_size;
  }
  int ncells() const noexcept { return mesh.ncells(); }
};

/// Uniform values on [-1, 1] from a seeded 64-bit Mersenne twister.
FunctionData random_function(std::size_t size, std::uint64_t seed);

/// nx x ny unit-square mesh with seeded random coefficient values.
Problem make_problem(fem::Form form, fem::CellKind cell, int degree, int nx, int ny, std::uint64_t seed);

/// Same operator and mesh with a caller-supplied coefficient.
Problem make_problem(const fem::OperatorSpec& spec, Mesh mesh, FunctionData u);

/// A output through cell2dof, coords through cell2vert, w_0 through cell2dof.
transform::MapsSpec maps_for(const fem::OperatorSpec& spec);

/// Straight-line gather, evaluate and scatter-add over every cell.
FunctionData assemble_reference(const fem::OperatorSpec& spec, const Mesh& mesh, const DofMap& dofmap,
                                const FunctionData& u);

/// Wrapper argument buffers; `out` receives the residual.
ir::Bindings wrapper_bindings(const Problem& p, std::span<double> out);

/// Interpret `kernels` one after another into a zeroed residual.
FunctionData interpret_kernels(std::span<const ir::LoopKernel* const> kernels, const Problem& p,
                               ir::FlopCount* flops = nullptr);

FunctionData run_compiled(const codegen::CompiledKernel& kernel, const Problem& p);

/// Data and map pointers in wrapper argument order, for timing loops.
struct CompiledArguments {
  std::vector<double*> dats;
  std::vector<const std::int32_t*> maps;
};
CompiledArguments compiled_arguments(const Problem& p, std::span<double> out);

/// ||a - b||_inf / ||b||_inf, or the absolute error when b vanishes.
double relative_error(std::span<const double> a, std::span<const double> b);
double max_abs_error(std::span<const double> a, std::span<const double> b);

} // namespace crossvec::harness
