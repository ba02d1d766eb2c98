#include "crossvec/ir/kernel.hpp"

#include "crossvec/error.hpp"

#include <algorithm>
#include <set>

namespace crossvec::ir {

const char* to_string(ArrayKind kind)
{
  switch (kind) {
  case ArrayKind::argument: return "argument";
  case ArrayKind::constant: return "constant";
  case ArrayKind::temporary: return "temporary";
  }
  return "?";
}

std::optional<std::int64_t> ArrayDecl::size() const
{
  std::int64_t n = 1;
  for (const auto& extent : shape) {
    if (!extent) {
      return std::nullopt;
    }
    n *= *extent;
  }
  return n;
}

std::vector<std::int64_t> row_major_strides(const std::vector<std::optional<std::int64_t>>& shape)
{
  std::vector<std::int64_t> strides(shape.size(), 1);
  std::int64_t running = 1;
  for (std::size_t k = shape.size(); k-- > 0;) {
    strides[k] = running;
    running *= shape[k].value_or(1);
  }
  return strides;
}

bool Statement::is_within(std::string_view iname) const
{
  return std::find(within.begin(), within.end(), iname) != within.end();
}

const IndexVar* LoopKernel::find_iname(std::string_view iname) const
{
  for (const auto& d : domains) {
    if (d.name == iname) {
      return &d;
    }
  }
  return nullptr;
}

IndexVar* LoopKernel::find_iname(std::string_view iname)
{
  return const_cast<IndexVar*>(std::as_const(*this).find_iname(iname));
}

const ArrayDecl* LoopKernel::find_array(std::string_view array) const
{
  for (const auto& a : arrays) {
    if (a.name == array) {
      return &a;
    }
  }
  return nullptr;
}

ArrayDecl* LoopKernel::find_array(std::string_view array)
{
  return const_cast<ArrayDecl*>(std::as_const(*this).find_array(array));
}

const Statement* LoopKernel::find_statement(std::string_view id) const
{
  for (const auto& s : statements) {
    if (s.id == id) {
      return &s;
    }
  }
  return nullptr;
}

bool LoopKernel::is_parameter(std::string_view name) const
{
  return std::find(parameters.begin(), parameters.end(), name) != parameters.end();
}

const IndexVar& LoopKernel::iname(std::string_view name) const
{
  if (const auto* d = find_iname(name)) {
    return *d;
  }
  throw InvalidArgument("kernel '" + this->name + "' has no iname '" + std::string(name) + "'");
}

const ArrayDecl& LoopKernel::array(std::string_view name) const
{
  if (const auto* a = find_array(name)) {
    return *a;
  }
  throw InvalidArgument("kernel '" + this->name + "' has no array '" + std::string(name) + "'");
}

std::vector<std::string> arrays_read(const Statement& statement)
{
  std::set<std::string> names;
  auto collect = [&](const Expr& e) {
    visit(e, [&](const Expr& x) {
      if (const auto* r = as<ArrayRead>(x)) {
        names.insert(r->array);
      }
    });
  };
  collect(statement.rhs);
  for (const auto& idx : statement.lhs.indices) {
    collect(idx);
  }
  if (statement.mode == AssignMode::increment) {
    names.insert(statement.lhs.array);
  }
  return {names.begin(), names.end()};
}

void infer_dependencies(LoopKernel& kernel)
{
  std::vector<std::set<std::string>> reads;
  reads.reserve(kernel.statements.size());
  for (const auto& s : kernel.statements) {
    auto r = arrays_read(s);
    reads.emplace_back(r.begin(), r.end());
  }
  for (std::size_t i = 0; i < kernel.statements.size(); ++i) {
    auto& s = kernel.statements[i];
    const std::string& writes = s.lhs.array;
    std::vector<std::string> deps;
    for (std::size_t j = 0; j < i; ++j) {
      const auto& t = kernel.statements[j];
      bool conflict = t.lhs.array == writes || reads[i].count(t.lhs.array) > 0 ||
                      reads[j].count(writes) > 0;
      if (conflict) {
        deps.push_back(t.id);
      }
    }
    s.depends_on = std::move(deps);
  }
}

FlopCount& FlopCount::operator+=(const FlopCount& other)
{
  adds += other.adds;
  subs += other.subs;
  muls += other.muls;
  divs += other.divs;
  abs_calls += other.abs_calls;
  return *this;
}

} // namespace crossvec::ir
