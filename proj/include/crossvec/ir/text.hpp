#pragma once

#include "crossvec/error.hpp"
#include "crossvec/ir/kernel.hpp"

#include <string>
#include <string_view>

namespace crossvec::ir {

/// First line of every dump; bump the number on incompatible format changes.
inline constexpr std::string_view kTextFormatHeader = "crossvec-ir 1";

class ParseError : public Error {
public:
  ParseError(int line, int column, const std::string& message)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line), column_(column)
  {
  }

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

/// Stable line-oriented text form of a kernel. parse(dump(k)) == k.
std::string dump(const LoopKernel& kernel);
LoopKernel parse(std::string_view text);

/// Shortest round-trip decimal form, always containing '.' or an exponent.
/// Throws InvalidArgument on non-finite values.
std::string format_real(double value);

/// Infix rendering of a single expression in the dump syntax.
std::string to_text(const Expr& e);

} // namespace crossvec::ir
