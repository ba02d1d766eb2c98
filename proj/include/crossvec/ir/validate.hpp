#pragma once

#include "crossvec/ir/kernel.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crossvec::ir {

struct Diagnostic {
  /// Statement the diagnostic concerns; empty for kernel-level problems.
  std::string statement;
  std::string message;
};

/// Structural and type checks. Accesses whose index ranges are statically
/// known (constant loop bounds, no parameters or map reads) are checked
/// against declared extents. An empty result means the kernel is well formed.
std::vector<Diagnostic> validate(const LoopKernel& kernel);

/// Throws InvalidArgument carrying every diagnostic when validate() is not clean.
void require_valid(const LoopKernel& kernel);

/// Type of an expression in the context of a kernel, or nullopt when it does
/// not type-check.
std::optional<ScalarType> type_of(const LoopKernel& kernel, const Expr& e);

bool is_identifier(const std::string& name);

} // namespace crossvec::ir
