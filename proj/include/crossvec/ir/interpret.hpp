#pragma once

#include "crossvec/error.hpp"
#include "crossvec/ir/kernel.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>

namespace crossvec::ir {

/// A caller-owned buffer bound to a kernel argument. Const spans are read-only.
using Buffer = std::variant<std::span<double>, std::span<const double>, std::span<std::int32_t>,
                            std::span<const std::int32_t>>;

using Bindings = std::map<std::string, Buffer, std::less<>>;
using ParamValues = std::map<std::string, std::int64_t, std::less<>>;

class InterpretError : public Error {
public:
  InterpretError(std::string statement, const std::string& message)
      : Error(message), statement_(std::move(statement))
  {
  }

  const std::string& statement() const noexcept { return statement_; }

private:
  std::string statement_;
};

/// Execute the kernel with sequential semantics (SIMD-tagged loops run as
/// ordinary loops) and return the number of real64 operations performed.
/// Increments count as one addition; integer index arithmetic is not counted.
/// Temporaries start as NaN so reads-before-writes surface in the results.
FlopCount interpret(const LoopKernel& kernel, const Bindings& bindings, const ParamValues& params);

} // namespace crossvec::ir
