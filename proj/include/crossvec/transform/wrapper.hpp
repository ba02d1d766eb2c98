#pragma once

#include "crossvec/ir/kernel.hpp"

#include <string>
#include <vector>

namespace crossvec::transform {

enum class Intent { read, increment };

/// How one local-kernel argument is reached from the cell loop.
struct ArgumentMap {
  std::string argument;
  std::string map;
  int arity = 1;
  Intent intent = Intent::read;
  int value_size = 1;
};

/// Entries follow the local kernel's argument order.
struct MapsSpec {
  std::vector<ArgumentMap> arguments;

  /// Distinct map names in first-use order; map k of the wrapper is map_order()[k].
  std::vector<std::string> map_order() const;
};

/// Cell iname of every global wrapper, iterated over [start, end).
inline constexpr const char* kCellIname = "n";

/// Fuse a local kernel into a global assembly loop. The k-th argument becomes
/// the global array dat<k>; its local copy is the temporary t<k>. Local
/// statements, temporaries, constants and inames are prefixed with "form_".
///
/// Statement ids: gather_<k> for each read argument, zero_out, the inlined
/// form_* statements, scatter.
ir::LoopKernel build_global_wrapper(const ir::LoopKernel& local, const MapsSpec& maps);

} // namespace crossvec::transform
