#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace crossvec::ir {

enum class ScalarType : std::uint8_t { real64, int32 };

enum class BinaryOp : std::uint8_t { add, sub, mul, div, floordiv };

enum class UnaryOp : std::uint8_t { neg, abs };

const char* to_string(ScalarType type);
const char* to_string(BinaryOp op);

struct Node;

/// Immutable expression tree handle. Copies share structure; equality is deep.
class Expr {
public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  bool valid() const noexcept { return node_ != nullptr; }

  friend bool operator==(const Expr& a, const Expr& b);

private:
  std::shared_ptr<const Node> node_;
};

/// Real literals carry a double, integer literals an int64.
struct Literal {
  std::variant<double, std::int64_t> value;
  bool is_real() const noexcept { return std::holds_alternative<double>(value); }
};

/// A loop index or an integer kernel parameter, resolved by name.
struct Variable {
  std::string name;
};

struct ArrayRead {
  std::string array;
  std::vector<Expr> indices;
};

struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};

struct Unary {
  UnaryOp op;
  Expr operand;
};

struct Node {
  std::variant<Literal, Variable, ArrayRead, Binary, Unary> value;
};

// Construction helpers.
Expr real(double value);
Expr integer(std::int64_t value);
Expr var(std::string name);
Expr read(std::string array, std::vector<Expr> indices = {});
Expr binary(BinaryOp op, Expr lhs, Expr rhs);
Expr floordiv(Expr lhs, Expr rhs);
Expr abs(Expr operand);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);

template <class T>
const T* as(const Expr& e)
{
  return std::get_if<T>(&e.node().value);
}

/// Top-down rewrite: `fn` may return a replacement for a node; otherwise the
/// children are rewritten and the node rebuilt (sharing unchanged subtrees).
using RewriteFn = std::function<std::optional<Expr>(const Expr&)>;
Expr rewrite(const Expr& e, const RewriteFn& fn);

/// Pre-order traversal of every node.
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);
Expr rename_arrays(const Expr& e, const std::map<std::string, std::string>& names);
Expr rename_variables(const Expr& e, const std::map<std::string, std::string>& names);

bool mentions_variable(const Expr& e, const std::string& name);

/// Canonicalize an integer expression into a sum of coefficient * atom terms
/// plus a constant. Atoms are variables and opaque subterms (array reads,
/// floor divisions), simplified recursively. Integer semantics are preserved.
Expr simplify_affine(const Expr& e);

/// Value of an expression built only from integer literals and arithmetic.
std::optional<std::int64_t> constant_value(const Expr& e);

} // namespace crossvec::ir
