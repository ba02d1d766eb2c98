#pragma once

#include "crossvec/ir/kernel.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace crossvec::codegen {

enum class TargetKind { scalar, pragma_simd, vector_ext };

const char* to_string(TargetKind kind);
/// Accepts "scalar", "pragma-simd" (or "pragma") and "vector-ext".
TargetKind parse_target_kind(std::string_view text);

struct Target {
  TargetKind kind = TargetKind::scalar;
  /// Lane width; ignored by the scalar target.
  int width = 1;
};

/// Vector extensions need 16, 32 or 64 byte vectors. Width 1 is accepted
/// for every target and lowers like pragma-simd.
void check_target(const Target& target);

struct ArgumentInfo {
  std::string name;
  ir::ScalarType type = ir::ScalarType::real64;
  /// Written by the kernel (the residual).
  bool written = false;
};

struct EmittedUnit {
  std::string source;
  /// Typed entry `wrap_<name>(start, end, dat..., map...)`.
  std::string entry;
  /// Uniform entry `<entry>_packed(start, end, double *const *dats, int const *const *maps)`.
  std::string packed_entry;
  /// Real arguments first, then integer ones, matching the entry signature.
  std::vector<ArgumentInfo> arguments;
  Target target;
};

/// Deterministic C source for `kernel`, followed by `remainder` (if given)
/// in its own block of the same function.
EmittedUnit emit(const ir::LoopKernel& kernel, const ir::LoopKernel* remainder, const Target& target);

} // namespace crossvec::codegen
