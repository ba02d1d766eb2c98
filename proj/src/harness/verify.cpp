#include "crossvec/harness/verify.hpp"

#include "crossvec/error.hpp"

#include <algorithm>

namespace crossvec::harness {

bool VerifyReport::passed() const
{
  return first_failure() == nullptr && flops_per_cell_plain == flops_per_cell_batched;
}

const StageResult* VerifyReport::first_failure() const
{
  for (const auto& s : stages) {
    if (!s.passed) {
      return &s;
    }
  }
  return nullptr;
}

namespace {

/// Point the first scatter entry of every cell at the second one.
ir::LoopKernel inject_scatter_fault(const ir::LoopKernel& k)
{
  ir::LoopKernel out = k;
  for (auto& s : out.statements) {
    if (s.id != "scatter") {
      continue;
    }
    const auto& is = out.iname("is");
    // is -> is + (is == 0) written affinely: is + 1 - ((is + arity - 1) // arity)
    auto arity = ir::constant_value(is.upper[0]).value();
    ir::Expr shifted = ir::var("is") + ir::integer(1) -
                       ir::floordiv(ir::var("is") + ir::integer(arity - 1), ir::integer(arity));
    for (auto& idx : s.lhs.indices) {
      idx = ir::rewrite(idx, [&](const ir::Expr& x) -> std::optional<ir::Expr> {
        if (const auto* r = ir::as<ir::ArrayRead>(x); r && out.array(r->array).type == ir::ScalarType::int32) {
          return ir::read(r->array, {ir::substitute(r->indices[0], {{"is", shifted}})});
        }
        return std::nullopt;
      });
    }
  }
  return out;
}

} // namespace

KernelSet build_kernels(const Problem& p, const transform::BatchPlan& plan, Fault fault)
{
  KernelSet ks;
  auto local = fem::build_local_kernel(p.spec, p.rule);
  ks.wrapper = transform::build_global_wrapper(local, maps_for(p.spec));
  ks.batched = transform::vectorize_wrapper(ks.wrapper, plan);
  if (fault == Fault::scatter_index) {
    ks.batched.main = inject_scatter_fault(ks.batched.main);
  }
  return ks;
}

VerifyReport verify_configuration(const Problem& p, const transform::BatchPlan& plan, const VerifyOptions& options)
{
  const KernelSet ks = build_kernels(p, plan, options.fault);
  const FunctionData reference = assemble_reference(p.spec, p.mesh, p.dofmap, p.u);

  VerifyReport report;
  auto record = [&](const char* stage, const FunctionData& got) {
    StageResult r;
    r.stage = stage;
    r.relative_error = relative_error(got, reference);
    r.abs_error = max_abs_error(got, reference);
    r.passed = r.relative_error <= options.tolerance;
    report.stages.push_back(r);
  };

  ir::FlopCount plain_flops;
  const ir::LoopKernel* plain[] = {&ks.wrapper};
  record(kStageInterpretWrapper, interpret_kernels(plain, p, &plain_flops));

  ir::FlopCount batched_flops;
  const ir::LoopKernel* batched[] = {&ks.batched.main, &ks.batched.remainder};
  record(kStageInterpretPipeline, interpret_kernels(batched, p, &batched_flops));
  report.flops_per_cell_plain = static_cast<double>(plain_flops.total()) / p.ncells();
  report.flops_per_cell_batched = static_cast<double>(batched_flops.total()) / p.ncells();

  if (options.interpret_only) {
    return report;
  }
  const std::string stem = std::string(fem::to_string(p.spec.form)) + "_" + fem::to_string(p.spec.cell()) + "_p" +
                           std::to_string(p.spec.degree()) + "_w" + std::to_string(plan.width);
  {
    auto unit = codegen::emit(ks.wrapper, nullptr, {codegen::TargetKind::scalar, 1});
    record(kStageCompiledScalar, run_compiled(codegen::compile_and_load(unit, options.toolchain, stem + "_scalar"), p));
  }
  {
    auto unit = codegen::emit(ks.batched.main, &ks.batched.remainder, {codegen::TargetKind::pragma_simd, plan.width});
    record(kStageCompiledPragma, run_compiled(codegen::compile_and_load(unit, options.toolchain, stem + "_pragma"), p));
  }
  {
    auto unit = codegen::emit(ks.batched.main, &ks.batched.remainder, {codegen::TargetKind::vector_ext, plan.width});
    record(kStageCompiledVector, run_compiled(codegen::compile_and_load(unit, options.toolchain, stem + "_vector"), p));
  }
  return report;
}

} // namespace crossvec::harness
