#pragma once

#include "crossvec/codegen/jit.hpp"
#include "crossvec/harness/problem.hpp"
#include "crossvec/transform/vectorize.hpp"

#include <string>
#include <vector>

namespace crossvec::harness {

/// Deliberate corruption used to check that verification notices errors.
enum class Fault {
  none,
  /// The batched kernel scatters each cell's first entry to its second dof.
  scatter_index,
};

struct VerifyOptions {
  bool interpret_only = false;
  Fault fault = Fault::none;
  double tolerance = 1e-12;
  codegen::Toolchain toolchain = codegen::Toolchain::verify();
};

struct StageResult {
  std::string stage;
  double relative_error = 0.0;
  double abs_error = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<StageResult> stages;
  /// Flops per cell of the plain wrapper and of the batched kernels.
  double flops_per_cell_plain = 0.0;
  double flops_per_cell_batched = 0.0;

  bool passed() const;
  const StageResult* first_failure() const;
};

/// Stage names, in the order they run.
inline constexpr const char* kStageInterpretWrapper = "interpret-wrapper";
inline constexpr const char* kStageInterpretPipeline = "interpret-pipeline";
inline constexpr const char* kStageCompiledScalar = "compiled-scalar";
inline constexpr const char* kStageCompiledPragma = "compiled-pragma-simd";
inline constexpr const char* kStageCompiledVector = "compiled-vector-ext";

/// Batched kernels plus the plain wrapper for one problem and plan.
struct KernelSet {
  ir::LoopKernel wrapper;
  transform::VectorizedKernels batched;
};

KernelSet build_kernels(const Problem& p, const transform::BatchPlan& plan, Fault fault = Fault::none);

/// Compare interpreter and compiled outputs against assemble_reference.
/// Toolchain errors propagate as ToolchainError.
VerifyReport verify_configuration(const Problem& p, const transform::BatchPlan& plan, const VerifyOptions& options);

} // namespace crossvec::harness
