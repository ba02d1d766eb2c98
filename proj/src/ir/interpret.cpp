#include "crossvec/ir/interpret.hpp"

#include "crossvec/ir/schedule.hpp"
#include "crossvec/ir/validate.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace crossvec::ir {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

struct ArraySlot {
  std::string name;
  ScalarType type = ScalarType::real64;
  double* real_data = nullptr;
  std::int32_t* int_data = nullptr;
  std::int64_t size = 0;
  bool writable = false;
  std::vector<std::optional<std::int64_t>> extents;
  std::vector<std::int64_t> strides;
};

enum class Op : std::uint8_t { lit_real, lit_int, var, read, add, sub, mul, div, floordiv, neg, abs };

struct CNode {
  Op op;
  bool real = false;
  double real_value = 0.0;
  std::int64_t int_value = 0;
  int slot = -1;
  int a = -1;
  int b = -1;
  std::vector<int> indices;
};

struct CStatement {
  const Statement* source = nullptr;
  int lhs_slot = -1;
  std::vector<int> lhs_indices;
  bool increment = false;
  int rhs = -1;
};

struct CLoop;

struct CItem {
  bool is_loop = false;
  int statement = -1;
  std::unique_ptr<CLoop> loop;
};

struct CLoop {
  int env_slot = -1;
  std::vector<int> lower;
  std::vector<int> upper;
  std::vector<CItem> body;
};

class Machine {
public:
  Machine(const LoopKernel& kernel, const Bindings& bindings, const ParamValues& params) : k_(kernel)
  {
    for (const auto& p : kernel.parameters) {
      auto it = params.find(p);
      if (it == params.end()) {
        throw InterpretError("", "parameter '" + p + "' of kernel '" + kernel.name + "' is not bound");
      }
      env_index_[p] = static_cast<int>(env_.size());
      env_names_.push_back(p);
      env_.push_back(it->second);
    }
    for (const auto& d : kernel.domains) {
      env_index_[d.name] = static_cast<int>(env_.size());
      env_names_.push_back(d.name);
      env_.push_back(0);
    }
    for (const auto& a : kernel.arrays) {
      bind_array(a, bindings);
    }
    for (std::size_t i = 0; i < kernel.statements.size(); ++i) {
      compile_statement(kernel.statements[i]);
    }
    for (const auto& node : build_schedule(kernel)) {
      items_.push_back(compile_item(node));
    }
  }

  FlopCount run()
  {
    for (const auto& item : items_) {
      exec(item);
    }
    return flops_;
  }

private:
  void bind_array(const ArrayDecl& a, const Bindings& bindings)
  {
    ArraySlot slot;
    slot.name = a.name;
    slot.type = a.type;
    slot.extents = a.shape;
    slot.strides = a.strides;
    if (a.kind == ArrayKind::argument) {
      auto it = bindings.find(a.name);
      if (it == bindings.end()) {
        throw InterpretError("", "argument '" + a.name + "' is not bound");
      }
      std::visit(
          [&](auto span) {
            using T = typename decltype(span)::element_type;
            using U = std::remove_const_t<T>;
            constexpr bool is_real = std::is_same_v<U, double>;
            if ((a.type == ScalarType::real64) != is_real) {
              throw InterpretError("", "argument '" + a.name + "' is declared " + to_string(a.type) +
                                           " but bound to a buffer of the other element type");
            }
            slot.writable = !std::is_const_v<T>;
            slot.size = static_cast<std::int64_t>(span.size());
            if constexpr (is_real) {
              slot.real_data = const_cast<double*>(span.data());
            } else {
              slot.int_data = const_cast<std::int32_t*>(span.data());
            }
          },
          it->second);
      if (auto n = a.size(); n && slot.size < *n) {
        throw InterpretError("", "argument '" + a.name + "' is bound to " + std::to_string(slot.size) +
                                     " elements but declares " + std::to_string(*n));
      }
    } else if (a.kind == ArrayKind::constant) {
      slot.size = static_cast<std::int64_t>(a.data.size());
      slot.real_data = const_cast<double*>(a.data.data());
    } else {
      slot.writable = true;
      slot.size = a.size().value_or(0);
      if (a.type == ScalarType::real64) {
        real_storage_.emplace_back(static_cast<std::size_t>(slot.size), std::numeric_limits<double>::quiet_NaN());
        slot.real_data = real_storage_.back().data();
      } else {
        int_storage_.emplace_back(static_cast<std::size_t>(slot.size), 0);
        slot.int_data = int_storage_.back().data();
      }
    }
    array_index_[a.name] = static_cast<int>(slots_.size());
    slots_.push_back(std::move(slot));
  }

  int compile_expr(const Expr& e)
  {
    CNode n{};
    const Node& src = e.node();
    if (const auto* l = std::get_if<Literal>(&src.value)) {
      if (l->is_real()) {
        n.op = Op::lit_real;
        n.real = true;
        n.real_value = std::get<double>(l->value);
      } else {
        n.op = Op::lit_int;
        n.int_value = std::get<std::int64_t>(l->value);
      }
    } else if (const auto* v = std::get_if<Variable>(&src.value)) {
      n.op = Op::var;
      auto it = env_index_.find(v->name);
      if (it == env_index_.end()) {
        throw InterpretError("", "unknown name '" + v->name + "'");
      }
      n.slot = it->second;
    } else if (const auto* r = std::get_if<ArrayRead>(&src.value)) {
      n.op = Op::read;
      auto it = array_index_.find(r->array);
      if (it == array_index_.end()) {
        throw InterpretError("", "read of unknown array '" + r->array + "'");
      }
      n.slot = it->second;
      n.real = slots_[n.slot].type == ScalarType::real64;
      for (const auto& idx : r->indices) {
        n.indices.push_back(compile_expr(idx));
      }
    } else if (const auto* b = std::get_if<Binary>(&src.value)) {
      n.a = compile_expr(b->lhs);
      n.b = compile_expr(b->rhs);
      n.real = nodes_[n.a].real;
      switch (b->op) {
      case BinaryOp::add: n.op = Op::add; break;
      case BinaryOp::sub: n.op = Op::sub; break;
      case BinaryOp::mul: n.op = Op::mul; break;
      case BinaryOp::div: n.op = Op::div; break;
      case BinaryOp::floordiv: n.op = Op::floordiv; break;
      }
    } else {
      const auto& u = std::get<Unary>(src.value);
      n.a = compile_expr(u.operand);
      n.real = nodes_[n.a].real;
      n.op = u.op == UnaryOp::neg ? Op::neg : Op::abs;
    }
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
  }

  void compile_statement(const Statement& s)
  {
    CStatement c;
    c.source = &s;
    auto it = array_index_.find(s.lhs.array);
    if (it == array_index_.end()) {
      throw InterpretError(s.id, "write to unknown array '" + s.lhs.array + "'");
    }
    c.lhs_slot = it->second;
    if (!slots_[c.lhs_slot].writable) {
      throw InterpretError(s.id, "statement '" + s.id + "' writes '" + s.lhs.array +
                                     "', which is bound read-only");
    }
    for (const auto& idx : s.lhs.indices) {
      c.lhs_indices.push_back(compile_expr(idx));
    }
    c.increment = s.mode == AssignMode::increment;
    c.rhs = compile_expr(s.rhs);
    statements_.push_back(std::move(c));
  }

  CItem compile_item(const ScheduleNode& node)
  {
    CItem item;
    if (!node.is_loop()) {
      item.statement = static_cast<int>(node.statement);
      return item;
    }
    item.is_loop = true;
    item.loop = std::make_unique<CLoop>();
    const IndexVar& d = k_.iname(node.iname);
    item.loop->env_slot = env_index_.at(d.name);
    for (const auto& b : d.lower) {
      item.loop->lower.push_back(compile_expr(b));
    }
    for (const auto& b : d.upper) {
      item.loop->upper.push_back(compile_expr(b));
    }
    for (const auto& child : node.body) {
      item.loop->body.push_back(compile_item(child));
    }
    return item;
  }

  void exec(const CItem& item)
  {
    if (!item.is_loop) {
      exec_statement(statements_[item.statement]);
      return;
    }
    const CLoop& loop = *item.loop;
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();
    for (int b : loop.lower) {
      lo = std::max(lo, eval_int(b));
    }
    for (int b : loop.upper) {
      hi = std::min(hi, eval_int(b));
    }
    active_.push_back(loop.env_slot);
    for (std::int64_t i = lo; i < hi; ++i) {
      env_[loop.env_slot] = i;
      for (const auto& child : loop.body) {
        exec(child);
      }
    }
    active_.pop_back();
  }

  std::string where() const
  {
    std::string out;
    for (int slot : active_) {
      if (!out.empty()) {
        out += ", ";
      }
      out += env_names_[slot] + "=" + std::to_string(env_[slot]);
    }
    return out.empty() ? "top level" : out;
  }

  std::int64_t offset(int slot_index, const std::vector<int>& indices)
  {
    const ArraySlot& slot = slots_[slot_index];
    std::int64_t off = 0;
    for (std::size_t axis = 0; axis < indices.size(); ++axis) {
      std::int64_t v = eval_int(indices[axis]);
      const auto& extent = slot.extents[axis];
      if (extent && (v < 0 || v >= *extent)) {
        throw InterpretError(current_->id, "statement '" + current_->id + "': index " + std::to_string(v) +
                                               " out of range for axis " + std::to_string(axis) + " of '" +
                                               slot.name + "' (extent " + std::to_string(*extent) + ") at " +
                                               where());
      }
      off += v * slot.strides[axis];
    }
    if (off < 0 || off >= slot.size) {
      throw InterpretError(current_->id, "statement '" + current_->id + "': offset " + std::to_string(off) +
                                             " outside the " + std::to_string(slot.size) + " elements of '" +
                                             slot.name + "' at " + where());
    }
    return off;
  }

  void exec_statement(const CStatement& s)
  {
    current_ = s.source;
    const ArraySlot& slot = slots_[s.lhs_slot];
    if (slot.type == ScalarType::real64) {
      double value = eval_real(s.rhs);
      double& target = slot.real_data[offset(s.lhs_slot, s.lhs_indices)];
      if (s.increment) {
        target += value;
        ++flops_.adds;
      } else {
        target = value;
      }
    } else {
      std::int64_t value = eval_int(s.rhs);
      slot.int_data[offset(s.lhs_slot, s.lhs_indices)] = static_cast<std::int32_t>(value);
    }
  }

  double eval_real(int i)
  {
    const CNode& n = nodes_[i];
    switch (n.op) {
    case Op::lit_real: return n.real_value;
    case Op::read: return slots_[n.slot].real_data[offset(n.slot, n.indices)];
    case Op::add: ++flops_.adds; return eval_real(n.a) + eval_real(n.b);
    case Op::sub: ++flops_.subs; return eval_real(n.a) - eval_real(n.b);
    case Op::mul: ++flops_.muls; return eval_real(n.a) * eval_real(n.b);
    case Op::div: ++flops_.divs; return eval_real(n.a) / eval_real(n.b);
    case Op::neg: return -eval_real(n.a);
    case Op::abs: ++flops_.abs_calls; return std::fabs(eval_real(n.a));
    default: break;
    }
    throw InterpretError(current_ ? current_->id : "", "integer expression in real context");
  }

  std::int64_t eval_int(int i)
  {
    const CNode& n = nodes_[i];
    switch (n.op) {
    case Op::lit_int: return n.int_value;
    case Op::var: return env_[n.slot];
    case Op::read: return slots_[n.slot].int_data[offset(n.slot, n.indices)];
    case Op::add: return eval_int(n.a) + eval_int(n.b);
    case Op::sub: return eval_int(n.a) - eval_int(n.b);
    case Op::mul: return eval_int(n.a) * eval_int(n.b);
    case Op::floordiv: {
      std::int64_t d = eval_int(n.b);
      if (d == 0) {
        throw InterpretError(current_ ? current_->id : "", "integer division by zero");
      }
      return floor_div(eval_int(n.a), d);
    }
    case Op::neg: return -eval_int(n.a);
    default: break;
    }
    throw InterpretError(current_ ? current_->id : "", "real expression in integer context");
  }

  const LoopKernel& k_;
  std::map<std::string, int> env_index_;
  std::vector<std::string> env_names_;
  std::vector<std::int64_t> env_;
  std::map<std::string, int> array_index_;
  std::vector<ArraySlot> slots_;
  std::vector<std::vector<double>> real_storage_;
  std::vector<std::vector<std::int32_t>> int_storage_;
  std::vector<CNode> nodes_;
  std::vector<CStatement> statements_;
  std::vector<CItem> items_;
  std::vector<int> active_;
  const Statement* current_ = nullptr;
  FlopCount flops_;
};

} // namespace

FlopCount interpret(const LoopKernel& kernel, const Bindings& bindings, const ParamValues& params)
{
  auto diags = validate(kernel);
  if (!diags.empty()) {
    const auto& d = diags.front();
    throw InterpretError(d.statement, "cannot interpret invalid kernel '" + kernel.name + "': " + d.message);
  }
  return Machine(kernel, bindings, params).run();
}

} // namespace crossvec::ir
