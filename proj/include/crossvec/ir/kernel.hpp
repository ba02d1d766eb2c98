#pragma once

#include "crossvec/ir/expr.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crossvec::ir {

struct SequentialTag {
  friend bool operator==(const SequentialTag&, const SequentialTag&) = default;
};

struct SimdTag {
  int width = 1;
  friend bool operator==(const SimdTag&, const SimdTag&) = default;
};

using InameTag = std::variant<SequentialTag, SimdTag>;

/// A loop index. The iteration range is [max(lower), min(upper)); bounds are
/// affine in parameters and enclosing inames (floor division by a positive
/// constant is allowed, as produced by splitting).
struct IndexVar {
  std::string name;
  std::vector<Expr> lower;
  std::vector<Expr> upper;
  InameTag tag = SequentialTag{};

  bool is_simd() const noexcept { return std::holds_alternative<SimdTag>(tag); }
  int simd_width() const noexcept { return is_simd() ? std::get<SimdTag>(tag).width : 0; }

  friend bool operator==(const IndexVar&, const IndexVar&) = default;
};

enum class ArrayKind : std::uint8_t { argument, constant, temporary };

const char* to_string(ArrayKind kind);

struct ArrayDecl {
  std::string name;
  ArrayKind kind = ArrayKind::temporary;
  ScalarType type = ScalarType::real64;
  /// Unknown extents (nullopt) are only permitted on arguments.
  std::vector<std::optional<std::int64_t>> shape;
  /// Per-axis strides in elements.
  std::vector<std::int64_t> strides;
  /// Bytes; a power of two.
  int alignment = 8;
  /// Set by SIMD tagging: the trailing axis is a private per-lane axis.
  bool lane_expanded = false;
  /// Payload for constants, in linear (stride) order.
  std::vector<double> data;

  std::size_t rank() const noexcept { return shape.size(); }
  /// Number of elements when every extent is known.
  std::optional<std::int64_t> size() const;

  friend bool operator==(const ArrayDecl&, const ArrayDecl&) = default;
};

/// Dense row-major strides for a fully known shape.
std::vector<std::int64_t> row_major_strides(const std::vector<std::optional<std::int64_t>>& shape);

struct Access {
  std::string array;
  std::vector<Expr> indices;
  friend bool operator==(const Access&, const Access&) = default;
};

enum class AssignMode : std::uint8_t { assign, increment };

struct Statement {
  std::string id;
  Access lhs;
  AssignMode mode = AssignMode::assign;
  Expr rhs;
  /// Enclosing loops, outermost first.
  std::vector<std::string> within;
  std::vector<std::string> depends_on;

  bool is_within(std::string_view iname) const;

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct LoopKernel {
  std::string name;
  std::vector<std::string> parameters;
  std::vector<IndexVar> domains;
  std::vector<ArrayDecl> arrays;
  std::vector<Statement> statements;

  const IndexVar* find_iname(std::string_view iname) const;
  IndexVar* find_iname(std::string_view iname);
  const ArrayDecl* find_array(std::string_view array) const;
  ArrayDecl* find_array(std::string_view array);
  const Statement* find_statement(std::string_view id) const;
  bool is_parameter(std::string_view name) const;

  const IndexVar& iname(std::string_view name) const;
  const ArrayDecl& array(std::string_view name) const;

  friend bool operator==(const LoopKernel&, const LoopKernel&) = default;
};

/// Replace each statement's dependencies with the conservative set implied by
/// program order: an earlier statement is a dependency if either of the pair
/// writes an array the other touches.
void infer_dependencies(LoopKernel& kernel);

/// Arrays read by a statement (right-hand side and all index expressions,
/// including the left-hand side's indices).
std::vector<std::string> arrays_read(const Statement& statement);

struct FlopCount {
  std::int64_t adds = 0;
  std::int64_t subs = 0;
  std::int64_t muls = 0;
  std::int64_t divs = 0;
  std::int64_t abs_calls = 0;

  std::int64_t total() const noexcept { return adds + subs + muls + divs + abs_calls; }

  FlopCount& operator+=(const FlopCount& other);
  friend FlopCount operator+(FlopCount a, const FlopCount& b) { return a += b; }
  friend bool operator==(const FlopCount&, const FlopCount&) = default;
};

} // namespace crossvec::ir
