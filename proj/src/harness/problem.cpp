#include "crossvec/harness/problem.hpp"

#include "crossvec/error.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace crossvec::harness {

FunctionData random_function(std::size_t size, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FunctionData u(size);
  for (auto& x : u) {
    x = dist(rng);
  }
  return u;
}

Problem make_problem(const fem::OperatorSpec& spec, Mesh mesh, FunctionData u)
{
  Problem p;
  p.spec = spec;
  p.rule = fem::quadrature_rule(spec.element.cell, fem::quadrature_degree(spec));
  p.dofmap = build_dof_map(mesh, spec.element);
  p.mesh = std::move(mesh);
  p.u = std::move(u);
  if (p.u.size() != p.function_size()) {
    throw InvalidArgument("coefficient has " + std::to_string(p.u.size()) + " values, expected " +
                          std::to_string(p.function_size()));
  }
  return p;
}

Problem make_problem(fem::Form form, fem::CellKind cell, int degree, int nx, int ny, std::uint64_t seed)
{
  auto spec = fem::make_operator(form, cell, degree);
  Mesh mesh = build_mesh(cell, nx, ny);
  DofMap dofs = build_dof_map(mesh, spec.element);
  Problem p = make_problem(spec, std::move(mesh),
                           random_function(static_cast<std::size_t>(dofs.ndofs_global) * spec.element.value_size, seed));
  p.seed = seed;
  return p;
}

transform::MapsSpec maps_for(const fem::OperatorSpec& spec)
{
  const int nd = spec.element.ndof_scalar;
  const int vs = spec.element.value_size;
  const int nv = spec.geometry.ndof_scalar;
  return transform::MapsSpec{{
      {"A", "cell2dof", nd, transform::Intent::increment, vs},
      {"coords", "cell2vert", nv, transform::Intent::read, 2},
      {"w_0", "cell2dof", nd, transform::Intent::read, vs},
  }};
}

FunctionData assemble_reference(const fem::OperatorSpec& spec, const Mesh& mesh, const DofMap& dofmap,
                                const FunctionData& u)
{
  fem::check_operator(spec);
  const int vs = spec.element.value_size;
  const int nd = spec.element.ndof_scalar;
  const int nv = mesh.vertices_per_cell();
  if (dofmap.element.cell.kind != mesh.kind || dofmap.ncells() != mesh.ncells() ||
      dofmap.ndof_local() != nd || u.size() != static_cast<std::size_t>(dofmap.ndofs_global) * vs) {
    throw InvalidArgument("assemble_reference: operator, mesh, dof map and coefficient do not match");
  }
  auto rule = fem::quadrature_rule(spec.element.cell, fem::quadrature_degree(spec));
  auto basis = fem::tabulate(spec.element, rule);
  auto geometry = fem::tabulate(spec.geometry, rule);
  FunctionData out(u.size(), 0.0);
  std::vector<double> coords(2 * static_cast<std::size_t>(nv));
  std::vector<double> w(static_cast<std::size_t>(nd) * vs);
  for (int c = 0; c < mesh.ncells(); ++c) {
    for (int v = 0; v < nv; ++v) {
      std::int32_t g = mesh.cell2vert[c * nv + v];
      coords[2 * v] = mesh.coords[2 * g];
      coords[2 * v + 1] = mesh.coords[2 * g + 1];
    }
    const std::int32_t* dofs = &dofmap.cell2dof[static_cast<std::size_t>(c) * nd];
    for (int i = 0; i < nd; ++i) {
      for (int comp = 0; comp < vs; ++comp) {
        w[i * vs + comp] = u[static_cast<std::size_t>(dofs[i]) * vs + comp];
      }
    }
    auto local = fem::evaluate_local(spec, rule, basis, geometry, coords, w);
    for (int i = 0; i < nd; ++i) {
      for (int comp = 0; comp < vs; ++comp) {
        out[static_cast<std::size_t>(dofs[i]) * vs + comp] += local[i * vs + comp];
      }
    }
  }
  return out;
}

ir::Bindings wrapper_bindings(const Problem& p, std::span<double> out)
{
  return {
      {"dat0", out},
      {"dat1", std::span<const double>(p.mesh.coords)},
      {"dat2", std::span<const double>(p.u)},
      {"map0", std::span<const std::int32_t>(p.dofmap.cell2dof)},
      {"map1", std::span<const std::int32_t>(p.mesh.cell2vert)},
  };
}

FunctionData interpret_kernels(std::span<const ir::LoopKernel* const> kernels, const Problem& p, ir::FlopCount* flops)
{
  FunctionData out(p.function_size(), 0.0);
  auto bindings = wrapper_bindings(p, out);
  ir::FlopCount total;
  for (const auto* k : kernels) {
    total += ir::interpret(*k, bindings, {{"start", 0}, {"end", p.ncells()}});
  }
  if (flops) {
    *flops = total;
  }
  return out;
}

CompiledArguments compiled_arguments(const Problem& p, std::span<double> out)
{
  // The packed entry takes non-const pointers; read-only arguments are
  // declared const in the typed entry and never written.
  return {
      {out.data(), const_cast<double*>(p.mesh.coords.data()), const_cast<double*>(p.u.data())},
      {p.dofmap.cell2dof.data(), p.mesh.cell2vert.data()},
  };
}

FunctionData run_compiled(const codegen::CompiledKernel& kernel, const Problem& p)
{
  FunctionData out(p.function_size(), 0.0);
  auto args = compiled_arguments(p, out);
  kernel(0, p.ncells(), args.dats, args.maps);
  return out;
}

double max_abs_error(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) {
    return std::numeric_limits<double>::infinity();
  }
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::abs(a[i] - b[i]);
    if (std::isnan(d)) {
      return std::numeric_limits<double>::infinity();
    }
    err = std::max(err, d);
  }
  return err;
}

double relative_error(std::span<const double> a, std::span<const double> b)
{
  double err = max_abs_error(a, b);
  double scale = 0.0;
  for (double x : b) {
    scale = std::max(scale, std::abs(x));
  }
  return scale > 0.0 ? err / scale : err;
}

} // namespace crossvec::harness
