#include "crossvec/ir/validate.hpp"

#include "crossvec/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

namespace crossvec::ir {

namespace {

struct Interval {
  std::int64_t lo;
  std::int64_t hi;
};

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

class Checker {
public:
  explicit Checker(const LoopKernel& kernel) : k_(kernel) {}

  std::vector<Diagnostic> run()
  {
    check_names();
    check_domains();
    check_arrays();
    for (const auto& s : k_.statements) {
      check_statement(s);
    }
    check_cycles();
    return std::move(diags_);
  }

  std::optional<ScalarType> type(const Expr& e, const std::string& stmt, bool report)
  {
    const Node& n = e.node();
    if (const auto* l = std::get_if<Literal>(&n.value)) {
      return l->is_real() ? ScalarType::real64 : ScalarType::int32;
    }
    if (const auto* v = std::get_if<Variable>(&n.value)) {
      if (!k_.find_iname(v->name) && !k_.is_parameter(v->name)) {
        if (report) {
          add(stmt, "unknown name '" + v->name + "' (neither an iname nor a parameter)");
        }
        return std::nullopt;
      }
      return ScalarType::int32;
    }
    if (const auto* r = std::get_if<ArrayRead>(&n.value)) {
      const ArrayDecl* a = k_.find_array(r->array);
      bool ok = true;
      for (const auto& idx : r->indices) {
        auto t = type(idx, stmt, report);
        if (t && *t != ScalarType::int32) {
          if (report) {
            add(stmt, "index into '" + r->array + "' is not an integer expression");
          }
          ok = false;
        } else if (!t) {
          ok = false;
        }
      }
      if (!a) {
        if (report) {
          add(stmt, "read of unknown array '" + r->array + "'");
        }
        return std::nullopt;
      }
      if (a->rank() != r->indices.size()) {
        if (report) {
          add(stmt, "array '" + r->array + "' has rank " + std::to_string(a->rank()) + " but is indexed with " +
                        std::to_string(r->indices.size()) + " indices");
        }
        ok = false;
      }
      return ok ? std::optional<ScalarType>(a->type) : std::nullopt;
    }
    if (const auto* b = std::get_if<Binary>(&n.value)) {
      auto l = type(b->lhs, stmt, report);
      auto r = type(b->rhs, stmt, report);
      if (!l || !r) {
        return std::nullopt;
      }
      if (*l != *r) {
        if (report) {
          add(stmt, std::string("operands of '") + to_string(b->op) + "' mix real64 and int32");
        }
        return std::nullopt;
      }
      if (b->op == BinaryOp::div && *l != ScalarType::real64) {
        if (report) {
          add(stmt, "division requires real64 operands; use '//' for integers");
        }
        return std::nullopt;
      }
      if (b->op == BinaryOp::floordiv) {
        auto c = constant_value(b->rhs);
        if (*l != ScalarType::int32 || !c || *c <= 0) {
          if (report) {
            add(stmt, "'//' requires integer operands and a positive constant divisor");
          }
          return std::nullopt;
        }
      }
      return l;
    }
    const auto& u = std::get<Unary>(n.value);
    auto t = type(u.operand, stmt, report);
    if (t && u.op == UnaryOp::abs && *t != ScalarType::real64) {
      if (report) {
        add(stmt, "abs requires a real64 operand");
      }
      return std::nullopt;
    }
    return t;
  }

private:
  void add(const std::string& stmt, std::string message) { diags_.push_back({stmt, std::move(message)}); }

  void check_names()
  {
    std::set<std::string> seen;
    auto claim = [&](const std::string& name, const char* what) {
      if (!is_identifier(name)) {
        add("", std::string(what) + " name '" + name + "' is not a valid identifier");
      }
      if (!seen.insert(name).second) {
        add("", std::string(what) + " name '" + name + "' is declared more than once");
      }
    };
    if (!is_identifier(k_.name)) {
      add("", "kernel name '" + k_.name + "' is not a valid identifier");
    }
    for (const auto& p : k_.parameters) {
      claim(p, "parameter");
    }
    for (const auto& d : k_.domains) {
      claim(d.name, "iname");
    }
    for (const auto& a : k_.arrays) {
      claim(a.name, "array");
    }
    std::set<std::string> ids;
    for (const auto& s : k_.statements) {
      if (!is_identifier(s.id)) {
        add(s.id, "statement id '" + s.id + "' is not a valid identifier");
      }
      if (!ids.insert(s.id).second) {
        add(s.id, "statement id '" + s.id + "' is used more than once");
      }
    }
  }

  bool affine(const Expr& e)
  {
    const Node& n = e.node();
    if (std::holds_alternative<Literal>(n.value) || std::holds_alternative<Variable>(n.value)) {
      return true;
    }
    if (std::holds_alternative<ArrayRead>(n.value)) {
      return false;
    }
    if (const auto* b = std::get_if<Binary>(&n.value)) {
      switch (b->op) {
      case BinaryOp::add:
      case BinaryOp::sub: return affine(b->lhs) && affine(b->rhs);
      case BinaryOp::mul:
        return affine(b->lhs) && affine(b->rhs) && (constant_value(b->lhs) || constant_value(b->rhs));
      case BinaryOp::floordiv: return affine(b->lhs) && constant_value(b->rhs).has_value();
      case BinaryOp::div: return false;
      }
    }
    const auto& u = std::get<Unary>(n.value);
    return u.op == UnaryOp::neg && affine(u.operand);
  }

  void check_domains()
  {
    for (const auto& d : k_.domains) {
      if (d.lower.empty() || d.upper.empty()) {
        add("", "iname '" + d.name + "' needs at least one lower and one upper bound");
      }
      if (d.is_simd() && d.simd_width() < 1) {
        add("", "iname '" + d.name + "' has a SIMD tag with non-positive width");
      }
      for (const auto* bounds : {&d.lower, &d.upper}) {
        for (const auto& b : *bounds) {
          auto t = type(b, "", true);
          if (t && *t != ScalarType::int32) {
            add("", "bound of iname '" + d.name + "' is not an integer expression");
          } else if (t && !affine(b)) {
            add("", "bound of iname '" + d.name + "' is not affine");
          }
          if (mentions_variable(b, d.name)) {
            add("", "bound of iname '" + d.name + "' refers to itself");
          }
        }
      }
      auto lo = constant_range_lower(d);
      auto hi = constant_range_upper(d);
      if (lo && hi) {
        ranges_[d.name] = Interval{*lo, *hi - 1};
      }
    }
  }

  std::optional<std::int64_t> constant_range_lower(const IndexVar& d)
  {
    std::optional<std::int64_t> out;
    for (const auto& b : d.lower) {
      auto c = constant_value(b);
      if (!c) {
        return std::nullopt;
      }
      out = out ? std::max(*out, *c) : *c;
    }
    return out;
  }

  std::optional<std::int64_t> constant_range_upper(const IndexVar& d)
  {
    std::optional<std::int64_t> out;
    for (const auto& b : d.upper) {
      auto c = constant_value(b);
      if (!c) {
        return std::nullopt;
      }
      out = out ? std::min(*out, *c) : *c;
    }
    return out;
  }

  void check_arrays()
  {
    for (const auto& a : k_.arrays) {
      if (a.alignment <= 0 || (a.alignment & (a.alignment - 1)) != 0) {
        add("", "array '" + a.name + "' alignment " + std::to_string(a.alignment) + " is not a power of two");
      }
      if (a.strides.size() != a.shape.size()) {
        add("", "array '" + a.name + "' has " + std::to_string(a.strides.size()) + " strides for rank " +
                    std::to_string(a.rank()));
        continue;
      }
      auto size = a.size();
      if (a.kind != ArrayKind::argument && !size) {
        add("", std::string(to_string(a.kind)) + " '" + a.name + "' must have a fully known shape");
        continue;
      }
      if (a.kind == ArrayKind::constant && a.type != ScalarType::real64) {
        add("", "constant '" + a.name + "' must be real64");
      }
      if (a.kind == ArrayKind::constant && static_cast<std::int64_t>(a.data.size()) != size.value_or(-1)) {
        add("", "constant '" + a.name + "' has " + std::to_string(a.data.size()) + " values for " +
                    std::to_string(size.value_or(0)) + " elements");
      }
      if (a.kind != ArrayKind::constant && !a.data.empty()) {
        add("", "only constants may carry data ('" + a.name + "')");
      }
      for (const auto& e : a.shape) {
        if (e && *e < 0) {
          add("", "array '" + a.name + "' has a negative extent");
        }
      }
      if (size) {
        // Sorted by stride, each axis must start where the previous one ends.
        // Axes of extent one never advance, so their stride is irrelevant.
        std::vector<std::size_t> order;
        for (std::size_t axis = 0; axis < a.rank(); ++axis) {
          if (*a.shape[axis] != 1) {
            order.push_back(axis);
          }
        }
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a.strides[x] < a.strides[y]; });
        std::int64_t expect = 1;
        bool dense = true;
        for (auto axis : order) {
          if (a.strides[axis] != expect) {
            dense = false;
            break;
          }
          expect *= *a.shape[axis];
        }
        if (!dense && *size > 0) {
          add("", "strides of '" + a.name + "' are not a dense linearization of its shape");
        }
      } else {
        for (auto s : a.strides) {
          if (s < 1) {
            add("", "array '" + a.name + "' has a non-positive stride");
          }
        }
      }
      if (a.lane_expanded && (a.kind != ArrayKind::temporary || a.rank() == 0 || a.strides.back() != 1)) {
        add("", "lane-expanded array '" + a.name + "' must be a temporary with a trailing unit-stride axis");
      }
    }
  }

  std::optional<Interval> interval(const Expr& e)
  {
    const Node& n = e.node();
    if (const auto* l = std::get_if<Literal>(&n.value)) {
      if (l->is_real()) {
        return std::nullopt;
      }
      auto v = std::get<std::int64_t>(l->value);
      return Interval{v, v};
    }
    if (const auto* v = std::get_if<Variable>(&n.value)) {
      auto it = ranges_.find(v->name);
      if (it == ranges_.end()) {
        return std::nullopt;
      }
      return it->second;
    }
    if (const auto* b = std::get_if<Binary>(&n.value)) {
      auto l = interval(b->lhs);
      auto r = interval(b->rhs);
      if (!l || !r) {
        return std::nullopt;
      }
      switch (b->op) {
      case BinaryOp::add: return Interval{l->lo + r->lo, l->hi + r->hi};
      case BinaryOp::sub: return Interval{l->lo - r->hi, l->hi - r->lo};
      case BinaryOp::mul: {
        std::int64_t c[] = {l->lo * r->lo, l->lo * r->hi, l->hi * r->lo, l->hi * r->hi};
        return Interval{*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
      }
      case BinaryOp::floordiv:
        if (r->lo != r->hi || r->lo <= 0) {
          return std::nullopt;
        }
        return Interval{floor_div(l->lo, r->lo), floor_div(l->hi, r->lo)};
      case BinaryOp::div: return std::nullopt;
      }
    }
    if (const auto* u = std::get_if<Unary>(&n.value); u && u->op == UnaryOp::neg) {
      auto o = interval(u->operand);
      if (!o) {
        return std::nullopt;
      }
      return Interval{-o->hi, -o->lo};
    }
    return std::nullopt;
  }

  void check_access(const Statement& s, const std::string& array, const std::vector<Expr>& indices)
  {
    const ArrayDecl* a = k_.find_array(array);
    if (!a || a->rank() != indices.size()) {
      return;
    }
    for (std::size_t axis = 0; axis < indices.size(); ++axis) {
      if (!a->shape[axis]) {
        continue;
      }
      auto range = interval(indices[axis]);
      if (range && (range->lo < 0 || range->hi >= *a->shape[axis])) {
        add(s.id, "access to '" + array + "' axis " + std::to_string(axis) + " spans [" +
                      std::to_string(range->lo) + ", " + std::to_string(range->hi) + "] outside extent " +
                      std::to_string(*a->shape[axis]));
      }
    }
  }

  void check_statement(const Statement& s)
  {
    // Empty loops never execute, so their accesses are not range-checked.
    bool empty_loop = false;
    std::set<std::string> within;
    int simd_count = 0;
    for (const auto& i : s.within) {
      const IndexVar* d = k_.find_iname(i);
      if (!d) {
        add(s.id, "statement is within unknown iname '" + i + "'");
        continue;
      }
      if (!within.insert(i).second) {
        add(s.id, "iname '" + i + "' appears twice in the within list");
      }
      if (d->is_simd()) {
        ++simd_count;
      }
      if (auto it = ranges_.find(i); it != ranges_.end() && it->second.hi < it->second.lo) {
        empty_loop = true;
      }
      for (const auto* bounds : {&d->lower, &d->upper}) {
        for (const auto& b : *bounds) {
          visit(b, [&](const Expr& x) {
            if (const auto* v = as<Variable>(x); v && k_.find_iname(v->name) && !within.count(v->name)) {
              add(s.id, "bound of iname '" + i + "' uses '" + v->name + "', which does not enclose it");
            }
          });
        }
      }
    }
    if (simd_count > 1) {
      add(s.id, "statement is within more than one SIMD-tagged iname");
    }

    const ArrayDecl* lhs = k_.find_array(s.lhs.array);
    if (!lhs) {
      add(s.id, "write to unknown array '" + s.lhs.array + "'");
    } else {
      if (lhs->kind == ArrayKind::constant) {
        add(s.id, "write to constant '" + s.lhs.array + "'");
      }
      if (lhs->rank() != s.lhs.indices.size()) {
        add(s.id, "array '" + s.lhs.array + "' has rank " + std::to_string(lhs->rank()) + " but is indexed with " +
                      std::to_string(s.lhs.indices.size()) + " indices");
      }
      if (s.mode == AssignMode::increment && lhs->type != ScalarType::real64) {
        add(s.id, "increment into non-real64 array '" + s.lhs.array + "'");
      }
    }
    for (const auto& idx : s.lhs.indices) {
      auto t = type(idx, s.id, true);
      if (t && *t != ScalarType::int32) {
        add(s.id, "index into '" + s.lhs.array + "' is not an integer expression");
      }
    }
    if (!s.rhs.valid()) {
      add(s.id, "statement has no right-hand side");
      return;
    }
    auto rt = type(s.rhs, s.id, true);
    if (rt && lhs && *rt != lhs->type) {
      add(s.id, std::string("right-hand side is ") + to_string(*rt) + " but '" + s.lhs.array + "' is " +
                    to_string(lhs->type));
    }

    auto check_inames = [&](const Expr& e) {
      visit(e, [&](const Expr& x) {
        if (const auto* v = as<Variable>(x); v && k_.find_iname(v->name) && !within.count(v->name)) {
          add(s.id, "uses iname '" + v->name + "' outside of its loop");
        }
        if (const auto* r = as<ArrayRead>(x); r && !empty_loop) {
          check_access(s, r->array, r->indices);
        }
      });
    };
    check_inames(s.rhs);
    for (const auto& idx : s.lhs.indices) {
      check_inames(idx);
    }
    if (!empty_loop) {
      check_access(s, s.lhs.array, s.lhs.indices);
    }
    for (const auto& dep : s.depends_on) {
      if (!k_.find_statement(dep)) {
        add(s.id, "depends on unknown statement '" + dep + "'");
      }
    }
  }

  void check_cycles()
  {
    std::map<std::string, int> color;  // 0 white, 1 on stack, 2 done
    std::vector<std::string> stack;
    std::function<void(const Statement&)> dfs = [&](const Statement& s) {
      color[s.id] = 1;
      stack.push_back(s.id);
      for (const auto& dep : s.depends_on) {
        const Statement* t = k_.find_statement(dep);
        if (!t) {
          continue;
        }
        if (color[dep] == 1) {
          auto from = std::find(stack.begin(), stack.end(), dep);
          std::string path;
          for (auto it = from; it != stack.end(); ++it) {
            path += *it + " -> ";
          }
          path += dep;
          add(s.id, "dependency cycle: " + path);
        } else if (color[dep] == 0) {
          dfs(*t);
        }
      }
      stack.pop_back();
      color[s.id] = 2;
    };
    for (const auto& s : k_.statements) {
      if (color[s.id] == 0) {
        dfs(s);
      }
    }
  }

  const LoopKernel& k_;
  std::vector<Diagnostic> diags_;
  std::map<std::string, Interval> ranges_;
};

} // namespace

bool is_identifier(const std::string& name)
{
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
    return false;
  }
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<Diagnostic> validate(const LoopKernel& kernel)
{
  return Checker(kernel).run();
}

void require_valid(const LoopKernel& kernel)
{
  auto diags = validate(kernel);
  if (diags.empty()) {
    return;
  }
  std::string message = "kernel '" + kernel.name + "' is invalid:";
  for (const auto& d : diags) {
    message += "\n  ";
    if (!d.statement.empty()) {
      message += "[" + d.statement + "] ";
    }
    message += d.message;
  }
  throw InvalidArgument(message);
}

std::optional<ScalarType> type_of(const LoopKernel& kernel, const Expr& e)
{
  return Checker(kernel).type(e, "", false);
}

} // namespace crossvec::ir
