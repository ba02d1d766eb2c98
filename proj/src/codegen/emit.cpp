#include "crossvec/codegen/emit.hpp"

#include "crossvec/error.hpp"
#include "crossvec/ir/schedule.hpp"
#include "crossvec/ir/text.hpp"
#include "crossvec/ir/validate.hpp"
#include "crossvec/transform/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace crossvec::codegen {

using namespace crossvec::ir;

const char* to_string(TargetKind kind)
{
  switch (kind) {
  case TargetKind::scalar: return "scalar";
  case TargetKind::pragma_simd: return "pragma-simd";
  case TargetKind::vector_ext: return "vector-ext";
  }
  return "?";
}

TargetKind parse_target_kind(std::string_view text)
{
  if (text == "scalar") {
    return TargetKind::scalar;
  }
  if (text == "pragma-simd" || text == "pragma") {
    return TargetKind::pragma_simd;
  }
  if (text == "vector-ext" || text == "vector") {
    return TargetKind::vector_ext;
  }
  throw InvalidArgument("unknown target '" + std::string(text) + "' (expected scalar, pragma-simd or vector-ext)");
}

void check_target(const Target& target)
{
  if (target.width < 1) {
    throw InvalidArgument("target width must be positive");
  }
  if (target.kind == TargetKind::vector_ext && target.width != 1) {
    int bytes = target.width * 8;
    if (bytes != 16 && bytes != 32 && bytes != 64) {
      throw InvalidArgument("vector-ext target needs a 16, 32 or 64 byte vector; width " +
                            std::to_string(target.width) + " gives " + std::to_string(bytes));
    }
  }
}

namespace {

struct Helpers {
  bool floordiv = false;
  bool min = false;
  bool max = false;
  bool fabs = false;
};

/// How lane-private temporaries are spelled inside one statement.
enum class LaneForm {
  flat,    // plain double arrays, lane folded into the linear index
  vector,  // whole-vector value, lane index dropped
  element  // one lane of a vector variable, t[k][lane]
};

std::string indent(int level)
{
  return std::string(2 * static_cast<std::size_t>(level), ' ');
}

class FunctionEmitter {
public:
  FunctionEmitter(const LoopKernel& kernel, const Target& target, Helpers& helpers)
      : k_(kernel), target_(target), helpers_(helpers)
  {
    for (const auto& d : k_.domains) {
      if (d.is_simd()) {
        lane_ = d.name;
        width_ = d.simd_width();
      }
    }
    if (!lane_.empty()) {
      races_ = transform::detect_races(k_, lane_);
    }
    vector_ = target_.kind == TargetKind::vector_ext && !lane_.empty() && width_ >= 2;
    pragmas_ = target_.kind != TargetKind::scalar && !lane_.empty();
  }

  bool uses_vectors() const noexcept { return vector_; }

  void declarations(std::ostream& os, int level) const
  {
    for (const auto& a : k_.arrays) {
      if (a.kind != ArrayKind::temporary) {
        continue;
      }
      const std::string base = a.type == ScalarType::real64 ? "double" : "int";
      std::int64_t size = a.size().value();
      std::string attr = a.alignment > 8 ? " __attribute__ ((aligned (" + std::to_string(a.alignment) + ")))" : "";
      os << indent(level);
      if (a.lane_expanded && vector_) {
        std::int64_t n = size / width_;
        os << vector_type() << ' ' << a.name;
        if (a.rank() > 1) {
          os << '[' << n << ']';
        }
      } else {
        os << base << ' ' << a.name;
        if (a.rank() > 0) {
          os << '[' << size << ']';
        }
      }
      os << attr << ";\n";
    }
  }

  void body(std::ostream& os, int level)
  {
    auto schedule = build_schedule(k_);
    nodes(os, schedule, level);
  }

  std::string vector_type() const { return "double" + std::to_string(width_); }
  std::string zeros() const { return "_zeros_" + vector_type(); }

private:
  void nodes(std::ostream& os, const std::vector<ScheduleNode>& list, int level)
  {
    for (const auto& node : list) {
      if (node.is_loop()) {
        loop(os, node, level);
      } else {
        statement(os, k_.statements[node.statement], LaneForm::flat, level);
      }
    }
  }

  bool contains_race(const ScheduleNode& node) const
  {
    if (!node.is_loop()) {
      return races_.count(k_.statements[node.statement].id) > 0;
    }
    return std::any_of(node.body.begin(), node.body.end(), [&](const ScheduleNode& c) { return contains_race(c); });
  }

  std::string bound(const std::vector<Expr>& exprs, bool lower)
  {
    std::string out = expr(exprs.back(), LaneForm::flat);
    for (std::size_t i = exprs.size() - 1; i-- > 0;) {
      (lower ? helpers_.max : helpers_.min) = true;
      out = std::string(lower ? "cv_max(" : "cv_min(") + expr(exprs[i], LaneForm::flat) + ", " + out + ")";
    }
    return out;
  }

  void loop_header(std::ostream& os, const IndexVar& d, int level)
  {
    os << indent(level) << "for (int " << d.name << " = " << bound(d.lower, true) << "; " << d.name << " < "
       << bound(d.upper, false) << "; ++" << d.name << ")\n";
  }

  void loop(std::ostream& os, const ScheduleNode& node, int level)
  {
    const IndexVar& d = k_.iname(node.iname);
    const bool is_lane = node.iname == lane_;
    const bool flat_body = std::none_of(node.body.begin(), node.body.end(), [](const ScheduleNode& c) { return c.is_loop(); });
    if (is_lane && vector_ && flat_body && !contains_race(node)) {
      vector_lane_loop(os, node, level);
      return;
    }
    if (is_lane && pragmas_ && !contains_race(node)) {
      os << indent(level) << "#pragma omp simd\n";
    }
    loop_header(os, d, level);
    os << indent(level) << "{\n";
    if (is_lane && vector_) {
      // A lane loop that stays scalar (the sequentialized scatter) addresses
      // one lane of the vector temporaries.
      for (const auto& c : node.body) {
        lane_scalar_nodes(os, c, level + 1);
      }
    } else {
      nodes(os, node.body, level + 1);
    }
    os << indent(level) << "}\n";
  }

  void lane_scalar_nodes(std::ostream& os, const ScheduleNode& node, int level)
  {
    if (!node.is_loop()) {
      statement(os, k_.statements[node.statement], LaneForm::element, level);
      return;
    }
    loop_header(os, k_.iname(node.iname), level);
    os << indent(level) << "{\n";
    for (const auto& c : node.body) {
      lane_scalar_nodes(os, c, level + 1);
    }
    os << indent(level) << "}\n";
  }

  bool vectorizable(const Statement& s) const
  {
    const ArrayDecl& lhs = k_.array(s.lhs.array);
    if (!lhs.lane_expanded) {
      return false;
    }
    bool ok = true;
    auto check_lane_free = [&](const std::vector<Expr>& indices, bool expanded) {
      std::size_t n = expanded ? indices.size() - 1 : indices.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (mentions_variable(indices[i], lane_)) {
          ok = false;
        }
      }
    };
    check_lane_free(s.lhs.indices, true);
    visit(s.rhs, [&](const Expr& x) {
      if (const auto* u = as<Unary>(x); u && u->op == UnaryOp::abs) {
        ok = false;
      }
      if (const auto* r = as<ArrayRead>(x)) {
        const ArrayDecl& a = k_.array(r->array);
        if (a.kind == ArrayKind::argument) {
          ok = false;
        }
        check_lane_free(r->indices, a.lane_expanded);
      }
    });
    return ok;
  }

  void vector_lane_loop(std::ostream& os, const ScheduleNode& node, int level)
  {
    const IndexVar& d = k_.iname(node.iname);
    std::size_t i = 0;
    while (i < node.body.size()) {
      const Statement& s = k_.statements[node.body[i].statement];
      if (vectorizable(s)) {
        statement(os, s, LaneForm::vector, level);
        ++i;
        continue;
      }
      os << indent(level) << "#pragma omp simd\n";
      loop_header(os, d, level);
      os << indent(level) << "{\n";
      while (i < node.body.size() && !vectorizable(k_.statements[node.body[i].statement])) {
        statement(os, k_.statements[node.body[i].statement], LaneForm::element, level + 1);
        ++i;
      }
      os << indent(level) << "}\n";
    }
  }

  bool reads_lane_private(const Expr& e) const
  {
    bool found = false;
    visit(e, [&](const Expr& x) {
      if (const auto* r = as<ArrayRead>(x); r && k_.array(r->array).lane_expanded) {
        found = true;
      }
    });
    return found;
  }

  void statement(std::ostream& os, const Statement& s, LaneForm form, int level)
  {
    std::string lhs = access(s.lhs.array, s.lhs.indices, form);
    std::string rhs;
    if (form == LaneForm::vector && !reads_lane_private(s.rhs)) {
      // Vector extensions do not broadcast scalars on assignment.
      const auto* lit = as<Literal>(s.rhs);
      if (lit && lit->is_real() && std::get<double>(lit->value) == 0.0 && !std::signbit(std::get<double>(lit->value))) {
        rhs = zeros();
      } else {
        rhs = zeros() + " + (" + expr(s.rhs, form) + ")";
      }
    } else {
      rhs = expr(s.rhs, form);
    }
    os << indent(level) << lhs << (s.mode == AssignMode::increment ? " += " : " = ") << rhs << ";\n";
  }

  std::string access(const std::string& name, const std::vector<Expr>& indices, LaneForm form)
  {
    const ArrayDecl& a = k_.array(name);
    std::string prefix = a.type == ScalarType::int32 ? "(long) " : "";
    if (a.lane_expanded && vector_) {
      Expr flat = integer(0);
      for (std::size_t i = 0; i + 1 < indices.size(); ++i) {
        flat = flat + integer(a.strides[i] / width_) * indices[i];
      }
      std::string out = name;
      if (a.rank() > 1) {
        out += "[" + expr(simplify_affine(flat), LaneForm::flat) + "]";
      }
      if (form == LaneForm::vector) {
        return out;
      }
      return out + "[" + expr(indices.back(), LaneForm::flat) + "]";
    }
    if (a.rank() == 0) {
      return name;
    }
    Expr flat = integer(0);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      flat = a.strides[i] == 1 ? flat + indices[i] : flat + integer(a.strides[i]) * indices[i];
    }
    return prefix + name + "[" + expr(simplify_affine(flat), form) + "]";
  }

  static int precedence(const Expr& e, const LoopKernel& k)
  {
    const Node& n = e.node();
    if (const auto* b = std::get_if<Binary>(&n.value)) {
      if (b->op == BinaryOp::floordiv) {
        return 4;
      }
      return (b->op == BinaryOp::add || b->op == BinaryOp::sub) ? 1 : 2;
    }
    if (const auto* u = std::get_if<Unary>(&n.value)) {
      return u->op == UnaryOp::neg ? 3 : 4;
    }
    if (const auto* r = std::get_if<ArrayRead>(&n.value)) {
      const auto* a = k.find_array(r->array);
      return a && a->type == ScalarType::int32 ? 3 : 4;
    }
    if (const auto* l = std::get_if<Literal>(&n.value)) {
      bool negative = l->is_real() ? std::signbit(std::get<double>(l->value)) : std::get<std::int64_t>(l->value) < 0;
      return negative ? 3 : 4;
    }
    return 4;
  }

  std::string operand(const Expr& e, LaneForm form, bool parens)
  {
    std::string s = expr(e, form);
    return parens ? "(" + s + ")" : s;
  }

  std::string expr(const Expr& e, LaneForm form)
  {
    const Node& n = e.node();
    if (const auto* l = std::get_if<Literal>(&n.value)) {
      return l->is_real() ? format_real(std::get<double>(l->value)) : std::to_string(std::get<std::int64_t>(l->value));
    }
    if (const auto* v = std::get_if<Variable>(&n.value)) {
      return v->name;
    }
    if (const auto* r = std::get_if<ArrayRead>(&n.value)) {
      return access(r->array, r->indices, form);
    }
    if (const auto* b = std::get_if<Binary>(&n.value)) {
      if (b->op == BinaryOp::floordiv) {
        helpers_.floordiv = true;
        return "cv_floordiv(" + expr(b->lhs, form) + ", " + expr(b->rhs, form) + ")";
      }
      int p = precedence(e, k_);
      return operand(b->lhs, form, precedence(b->lhs, k_) < p) + " " + to_string(b->op) + " " +
             operand(b->rhs, form, precedence(b->rhs, k_) <= p);
    }
    const auto& u = std::get<Unary>(n.value);
    if (u.op == UnaryOp::abs) {
      helpers_.fabs = true;
      return "fabs(" + expr(u.operand, form) + ")";
    }
    return "-" + operand(u.operand, form, precedence(u.operand, k_) <= 3);
  }

  const LoopKernel& k_;
  Target target_;
  Helpers& helpers_;
  std::string lane_;
  int width_ = 1;
  std::set<std::string> races_;
  bool vector_ = false;
  bool pragmas_ = false;
};

void check_kernel(const LoopKernel& k, const Target& target)
{
  require_valid(k);
  int simd = 0;
  for (const auto& d : k.domains) {
    if (d.is_simd()) {
      ++simd;
      if (target.kind != TargetKind::scalar && d.simd_width() != target.width) {
        throw InvalidArgument("kernel '" + k.name + "' is batched for width " + std::to_string(d.simd_width()) +
                              " but the target width is " + std::to_string(target.width));
      }
      if (d.lower.size() != 1 || d.upper.size() != 1 || constant_value(d.lower[0]) != 0 ||
          constant_value(d.upper[0]) != d.simd_width()) {
        throw InvalidArgument("simd iname '" + d.name + "' must run over [0, width)");
      }
    }
  }
  if (simd > 1) {
    throw InvalidArgument("kernel '" + k.name + "' has more than one simd iname");
  }
  for (const auto& a : k.arrays) {
    if (a.kind == ArrayKind::temporary && !a.size()) {
      throw InvalidArgument("temporary '" + a.name + "' has unknown extent");
    }
  }
}

std::vector<ArgumentInfo> arguments_of(const LoopKernel& k, const LoopKernel* remainder)
{
  std::set<std::string> written;
  for (const auto* kk : {&k, remainder}) {
    if (kk) {
      for (const auto& s : kk->statements) {
        written.insert(s.lhs.array);
      }
    }
  }
  std::vector<ArgumentInfo> out;
  for (ScalarType type : {ScalarType::real64, ScalarType::int32}) {
    for (const auto& a : k.arrays) {
      if (a.kind == ArrayKind::argument && a.type == type) {
        out.push_back({a.name, a.type, written.count(a.name) > 0});
      }
    }
  }
  return out;
}

void constants(std::ostream& os, const LoopKernel& k, std::map<std::string, const ArrayDecl*>& seen)
{
  for (const auto& a : k.arrays) {
    if (a.kind != ArrayKind::constant) {
      continue;
    }
    if (auto it = seen.find(a.name); it != seen.end()) {
      if (it->second->data != a.data) {
        throw InvalidArgument("constant '" + a.name + "' differs between the main and remainder kernels");
      }
      continue;
    }
    seen[a.name] = &a;
    os << "static " << (a.type == ScalarType::real64 ? "double" : "int") << " const " << a.name << '['
       << a.data.size() << "] = {";
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      os << (i % 4 == 0 ? "\n  " : " ") << format_real(a.data[i]) << (i + 1 < a.data.size() ? "," : "");
    }
    os << "\n};\n";
  }
}

} // namespace

EmittedUnit emit(const LoopKernel& kernel, const LoopKernel* remainder, const Target& target)
{
  check_target(target);
  check_kernel(kernel, target);
  auto args = arguments_of(kernel, remainder);
  if (remainder) {
    check_kernel(*remainder, Target{});
    if (remainder->parameters != kernel.parameters || arguments_of(*remainder, &kernel).size() != args.size()) {
      throw InvalidArgument("remainder kernel does not share the main kernel's interface");
    }
    for (const auto& a : args) {
      const auto* r = remainder->find_array(a.name);
      if (!r || r->kind != ArrayKind::argument || r->type != a.type) {
        throw InvalidArgument("remainder kernel lacks argument '" + a.name + "'");
      }
    }
  }

  Helpers helpers;
  FunctionEmitter main(kernel, target, helpers);
  std::ostringstream fn;
  const std::string entry = "wrap_" + kernel.name;
  fn << "void " << entry << "(";
  for (std::size_t i = 0; i < kernel.parameters.size(); ++i) {
    fn << (i ? ", " : "") << "int const " << kernel.parameters[i];
  }
  for (const auto& a : args) {
    fn << ", " << (a.type == ScalarType::real64 ? "double " : "int ") << (a.written ? "" : "const ") << "*__restrict__ "
       << a.name;
  }
  fn << ")\n{\n";
  main.declarations(fn, 1);
  fn << '\n';
  main.body(fn, 1);
  if (remainder) {
    FunctionEmitter rem(*remainder, Target{}, helpers);
    fn << "\n  // cells outside the full batches\n  {\n";
    rem.declarations(fn, 2);
    fn << '\n';
    rem.body(fn, 2);
    fn << "  }\n";
  }
  fn << "}\n\n";

  const std::string packed = entry + "_packed";
  fn << "void " << packed << "(int const start, int const end, double *const *dats, int const *const *maps)\n{\n";
  fn << "  " << entry << "(";
  std::vector<std::string> call;
  int ndat = 0;
  int nmap = 0;
  for (const auto& p : kernel.parameters) {
    call.push_back(p);
  }
  for (const auto& a : args) {
    call.push_back(a.type == ScalarType::real64 ? "dats[" + std::to_string(ndat++) + "]"
                                                : "maps[" + std::to_string(nmap++) + "]");
  }
  for (std::size_t i = 0; i < call.size(); ++i) {
    fn << (i ? ", " : "") << call[i];
  }
  fn << ");\n}\n";
  if (kernel.parameters != std::vector<std::string>{"start", "end"}) {
    throw InvalidArgument("wrapper kernels take exactly the parameters start and end");
  }

  std::ostringstream os;
  os << "// " << entry << ": " << to_string(target.kind);
  if (target.kind != TargetKind::scalar) {
    os << ", width " << target.width;
  }
  os << "\n";
  if (helpers.fabs) {
    os << "#include <math.h>\n";
  }
  os << '\n';
  if (helpers.floordiv) {
    os << "static inline int cv_floordiv(int a, int b)\n{\n"
       << "  int q = a / b;\n  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;\n}\n\n";
  }
  if (helpers.min) {
    os << "static inline int cv_min(int a, int b) { return a < b ? a : b; }\n";
  }
  if (helpers.max) {
    os << "static inline int cv_max(int a, int b) { return a > b ? a : b; }\n";
  }
  if (helpers.min || helpers.max) {
    os << '\n';
  }
  if (main.uses_vectors()) {
    os << "typedef double " << main.vector_type() << " __attribute__ ((vector_size (" << 8 * target.width
       << ")));\n";
    os << "static " << main.vector_type() << " const " << main.zeros() << " __attribute__ ((aligned (64))) = { 0.0 };\n\n";
  }
  std::map<std::string, const ArrayDecl*> seen;
  constants(os, kernel, seen);
  if (remainder) {
    constants(os, *remainder, seen);
  }
  if (!seen.empty()) {
    os << '\n';
  }
  os << fn.str();

  EmittedUnit unit;
  unit.source = os.str();
  unit.entry = entry;
  unit.packed_entry = packed;
  unit.arguments = std::move(args);
  unit.target = target;
  return unit;
}

} // namespace crossvec::codegen
