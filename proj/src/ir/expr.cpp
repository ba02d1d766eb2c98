#include "crossvec/ir/expr.hpp"

#include "crossvec/error.hpp"

#include <cstring>
#include <utility>

namespace crossvec::ir {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Expr make(Node node)
{
  return Expr(std::make_shared<const Node>(std::move(node)));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

} // namespace

const char* to_string(ScalarType type)
{
  return type == ScalarType::real64 ? "real64" : "int32";
}

const char* to_string(BinaryOp op)
{
  switch (op) {
  case BinaryOp::add: return "+";
  case BinaryOp::sub: return "-";
  case BinaryOp::mul: return "*";
  case BinaryOp::div: return "/";
  case BinaryOp::floordiv: return "//";
  }
  return "?";
}

bool operator==(const Expr& a, const Expr& b)
{
  if (a.node_ == b.node_) {
    return true;
  }
  if (!a.node_ || !b.node_) {
    return false;
  }
  const auto& x = a.node_->value;
  const auto& y = b.node_->value;
  if (x.index() != y.index()) {
    return false;
  }
  return std::visit(
      overloaded{
          [&](const Literal& l) {
            const auto& r = std::get<Literal>(y);
            if (l.value.index() != r.value.index()) {
              return false;
            }
            if (l.is_real()) {
              // Bitwise, so that -0.0 and 0.0 differ.
              double p = std::get<double>(l.value);
              double q = std::get<double>(r.value);
              return std::memcmp(&p, &q, sizeof(double)) == 0;
            }
            return std::get<std::int64_t>(l.value) == std::get<std::int64_t>(r.value);
          },
          [&](const Variable& v) { return v.name == std::get<Variable>(y).name; },
          [&](const ArrayRead& r) {
            const auto& o = std::get<ArrayRead>(y);
            return r.array == o.array && r.indices == o.indices;
          },
          [&](const Binary& bin) {
            const auto& o = std::get<Binary>(y);
            return bin.op == o.op && bin.lhs == o.lhs && bin.rhs == o.rhs;
          },
          [&](const Unary& u) {
            const auto& o = std::get<Unary>(y);
            return u.op == o.op && u.operand == o.operand;
          },
      },
      x);
}

Expr real(double value) { return make(Node{Literal{value}}); }
Expr integer(std::int64_t value) { return make(Node{Literal{value}}); }
Expr var(std::string name) { return make(Node{Variable{std::move(name)}}); }

Expr read(std::string array, std::vector<Expr> indices)
{
  return make(Node{ArrayRead{std::move(array), std::move(indices)}});
}

Expr binary(BinaryOp op, Expr lhs, Expr rhs)
{
  if (!lhs.valid() || !rhs.valid()) {
    throw InvalidArgument("binary expression with an empty operand");
  }
  return make(Node{Binary{op, std::move(lhs), std::move(rhs)}});
}

Expr floordiv(Expr lhs, Expr rhs) { return binary(BinaryOp::floordiv, std::move(lhs), std::move(rhs)); }

Expr abs(Expr operand) { return make(Node{Unary{UnaryOp::abs, std::move(operand)}}); }

Expr operator+(Expr a, Expr b) { return binary(BinaryOp::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return binary(BinaryOp::sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return binary(BinaryOp::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return binary(BinaryOp::div, std::move(a), std::move(b)); }
Expr operator-(Expr a) { return make(Node{Unary{UnaryOp::neg, std::move(a)}}); }

Expr rewrite(const Expr& e, const RewriteFn& fn)
{
  if (auto replaced = fn(e)) {
    return *replaced;
  }
  return std::visit(
      overloaded{
          [&](const Literal&) { return e; },
          [&](const Variable&) { return e; },
          [&](const ArrayRead& r) {
            std::vector<Expr> indices;
            indices.reserve(r.indices.size());
            bool changed = false;
            for (const auto& idx : r.indices) {
              indices.push_back(rewrite(idx, fn));
              changed = changed || !(indices.back() == idx);
            }
            return changed ? read(r.array, std::move(indices)) : e;
          },
          [&](const Binary& b) {
            Expr l = rewrite(b.lhs, fn);
            Expr r = rewrite(b.rhs, fn);
            if (l == b.lhs && r == b.rhs) {
              return e;
            }
            return binary(b.op, std::move(l), std::move(r));
          },
          [&](const Unary& u) {
            Expr o = rewrite(u.operand, fn);
            if (o == u.operand) {
              return e;
            }
            return make(Node{Unary{u.op, std::move(o)}});
          },
      },
      e.node().value);
}

void visit(const Expr& e, const std::function<void(const Expr&)>& fn)
{
  fn(e);
  std::visit(overloaded{
                 [](const Literal&) {},
                 [](const Variable&) {},
                 [&](const ArrayRead& r) {
                   for (const auto& idx : r.indices) {
                     visit(idx, fn);
                   }
                 },
                 [&](const Binary& b) {
                   visit(b.lhs, fn);
                   visit(b.rhs, fn);
                 },
                 [&](const Unary& u) { visit(u.operand, fn); },
             },
             e.node().value);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements)
{
  return rewrite(e, [&](const Expr& x) -> std::optional<Expr> {
    if (const auto* v = as<Variable>(x)) {
      if (auto it = replacements.find(v->name); it != replacements.end()) {
        return it->second;
      }
    }
    return std::nullopt;
  });
}

Expr rename_arrays(const Expr& e, const std::map<std::string, std::string>& names)
{
  return rewrite(e, [&](const Expr& x) -> std::optional<Expr> {
    if (const auto* r = as<ArrayRead>(x)) {
      auto it = names.find(r->array);
      if (it == names.end()) {
        return std::nullopt;
      }
      std::vector<Expr> indices;
      for (const auto& idx : r->indices) {
        indices.push_back(rename_arrays(idx, names));
      }
      return read(it->second, std::move(indices));
    }
    return std::nullopt;
  });
}

Expr rename_variables(const Expr& e, const std::map<std::string, std::string>& names)
{
  return rewrite(e, [&](const Expr& x) -> std::optional<Expr> {
    if (const auto* v = as<Variable>(x)) {
      if (auto it = names.find(v->name); it != names.end()) {
        return var(it->second);
      }
    }
    return std::nullopt;
  });
}

bool mentions_variable(const Expr& e, const std::string& name)
{
  bool found = false;
  visit(e, [&](const Expr& x) {
    if (const auto* v = as<Variable>(x); v && v->name == name) {
      found = true;
    }
  });
  return found;
}

std::optional<std::int64_t> constant_value(const Expr& e)
{
  return std::visit(
      overloaded{
          [](const Literal& l) -> std::optional<std::int64_t> {
            if (l.is_real()) {
              return std::nullopt;
            }
            return std::get<std::int64_t>(l.value);
          },
          [](const Variable&) -> std::optional<std::int64_t> { return std::nullopt; },
          [](const ArrayRead&) -> std::optional<std::int64_t> { return std::nullopt; },
          [](const Binary& b) -> std::optional<std::int64_t> {
            auto l = constant_value(b.lhs);
            auto r = constant_value(b.rhs);
            if (!l || !r) {
              return std::nullopt;
            }
            switch (b.op) {
            case BinaryOp::add: return *l + *r;
            case BinaryOp::sub: return *l - *r;
            case BinaryOp::mul: return *l * *r;
            case BinaryOp::floordiv:
              if (*r == 0) {
                return std::nullopt;
              }
              return floor_div(*l, *r);
            case BinaryOp::div: return std::nullopt;
            }
            return std::nullopt;
          },
          [](const Unary& u) -> std::optional<std::int64_t> {
            auto o = constant_value(u.operand);
            if (!o) {
              return std::nullopt;
            }
            return u.op == UnaryOp::neg ? -*o : (*o < 0 ? -*o : *o);
          },
      },
      e.node().value);
}

namespace {

struct LinearForm {
  std::vector<std::pair<Expr, std::int64_t>> terms;
  std::int64_t constant = 0;

  void add_term(const Expr& atom, std::int64_t coeff)
  {
    for (auto& [a, c] : terms) {
      if (a == atom) {
        c += coeff;
        return;
      }
    }
    terms.emplace_back(atom, coeff);
  }

  void add(const LinearForm& other, std::int64_t scale)
  {
    for (const auto& [a, c] : other.terms) {
      add_term(a, c * scale);
    }
    constant += other.constant * scale;
  }

  bool is_constant() const
  {
    for (const auto& [a, c] : terms) {
      if (c != 0) {
        return false;
      }
    }
    return true;
  }

  Expr to_expr() const
  {
    Expr out;
    for (const auto& [atom, c] : terms) {
      if (c == 0) {
        continue;
      }
      if (!out.valid()) {
        if (c == 1) {
          out = atom;
        } else if (c == -1) {
          out = -atom;
        } else {
          out = integer(c) * atom;
        }
        continue;
      }
      std::int64_t m = c < 0 ? -c : c;
      Expr term = m == 1 ? atom : integer(m) * atom;
      out = c < 0 ? out - term : out + term;
    }
    if (!out.valid()) {
      return integer(constant);
    }
    if (constant > 0) {
      out = out + integer(constant);
    } else if (constant < 0) {
      out = out - integer(-constant);
    }
    return out;
  }
};

LinearForm linearize(const Expr& e);

Expr simplify_atom(const Expr& e)
{
  if (const auto* r = as<ArrayRead>(e)) {
    std::vector<Expr> indices;
    for (const auto& idx : r->indices) {
      indices.push_back(simplify_affine(idx));
    }
    return read(r->array, std::move(indices));
  }
  if (const auto* b = as<Binary>(e)) {
    return binary(b->op, simplify_affine(b->lhs), simplify_affine(b->rhs));
  }
  if (const auto* u = as<Unary>(e)) {
    return make(Node{Unary{u->op, simplify_affine(u->operand)}});
  }
  return e;
}

LinearForm linearize(const Expr& e)
{
  LinearForm out;
  if (const auto* l = as<Literal>(e)) {
    if (l->is_real()) {
      out.add_term(e, 1);
    } else {
      out.constant = std::get<std::int64_t>(l->value);
    }
    return out;
  }
  if (as<Variable>(e)) {
    out.add_term(e, 1);
    return out;
  }
  if (const auto* b = as<Binary>(e)) {
    switch (b->op) {
    case BinaryOp::add:
    case BinaryOp::sub: {
      out.add(linearize(b->lhs), 1);
      out.add(linearize(b->rhs), b->op == BinaryOp::add ? 1 : -1);
      return out;
    }
    case BinaryOp::mul: {
      LinearForm l = linearize(b->lhs);
      LinearForm r = linearize(b->rhs);
      if (l.is_constant()) {
        out.add(r, l.constant);
        return out;
      }
      if (r.is_constant()) {
        out.add(l, r.constant);
        return out;
      }
      out.add_term(binary(BinaryOp::mul, l.to_expr(), r.to_expr()), 1);
      return out;
    }
    case BinaryOp::floordiv: {
      LinearForm l = linearize(b->lhs);
      LinearForm r = linearize(b->rhs);
      if (l.is_constant() && r.is_constant() && r.constant != 0) {
        out.constant = floor_div(l.constant, r.constant);
        return out;
      }
      out.add_term(floordiv(l.to_expr(), r.to_expr()), 1);
      return out;
    }
    case BinaryOp::div:
      out.add_term(simplify_atom(e), 1);
      return out;
    }
  }
  if (const auto* u = as<Unary>(e); u && u->op == UnaryOp::neg) {
    out.add(linearize(u->operand), -1);
    return out;
  }
  out.add_term(simplify_atom(e), 1);
  return out;
}

} // namespace

Expr simplify_affine(const Expr& e)
{
  return linearize(e).to_expr();
}

} // namespace crossvec::ir
