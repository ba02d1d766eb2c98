#include "crossvec/transform/wrapper.hpp"

#include "crossvec/error.hpp"
#include "crossvec/ir/validate.hpp"

#include <algorithm>
#include <map>

namespace crossvec::transform {

using namespace crossvec::ir;

std::vector<std::string> MapsSpec::map_order() const
{
  std::vector<std::string> out;
  for (const auto& a : arguments) {
    if (std::find(out.begin(), out.end(), a.map) == out.end()) {
      out.push_back(a.map);
    }
  }
  return out;
}

namespace {

const std::string kPrefix = "form_";

IndexVar range(const std::string& name, Expr lower, Expr upper)
{
  IndexVar d;
  d.name = name;
  d.lower = {std::move(lower)};
  d.upper = {std::move(upper)};
  return d;
}

/// Local index of (node, component) in a temporary shaped like the local argument.
std::vector<Expr> local_index(const ArrayDecl& arg, int value_size, const Expr& node, const Expr& comp)
{
  if (arg.rank() == 2) {
    return {node, comp};
  }
  if (value_size == 1) {
    return {node};
  }
  return {integer(value_size) * node + comp};
}

Expr global_index(const std::string& map, int arity, int value_size, const Expr& node, const Expr& comp)
{
  Expr entry = read(map, {integer(arity) * var(kCellIname) + node});
  if (value_size == 1) {
    return entry;
  }
  return integer(value_size) * entry + comp;
}

Statement statement(std::string id, Access lhs, AssignMode mode, Expr rhs, std::vector<std::string> within)
{
  Statement s;
  s.id = std::move(id);
  s.lhs = std::move(lhs);
  s.mode = mode;
  s.rhs = std::move(rhs);
  s.within = std::move(within);
  return s;
}

} // namespace

LoopKernel build_global_wrapper(const LoopKernel& local, const MapsSpec& maps)
{
  require_valid(local);
  std::vector<const ArrayDecl*> args;
  for (const auto& a : local.arrays) {
    if (a.kind == ArrayKind::argument) {
      args.push_back(&a);
    }
  }
  if (args.size() != maps.arguments.size()) {
    throw InvalidArgument("kernel '" + local.name + "' has " + std::to_string(args.size()) +
                          " arguments but the maps describe " + std::to_string(maps.arguments.size()));
  }
  int increments = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto& a = *args[k];
    const auto& m = maps.arguments[k];
    if (a.name != m.argument) {
      throw InvalidArgument("argument " + std::to_string(k) + " of '" + local.name + "' is '" + a.name +
                            "' but the maps describe '" + m.argument + "'");
    }
    if (m.arity < 1 || m.value_size < 1) {
      throw InvalidArgument("argument '" + a.name + "': arity and value size must be positive");
    }
    if (a.type != ScalarType::real64) {
      throw InvalidArgument("argument '" + a.name + "' must be real64");
    }
    auto size = a.size();
    bool shape_ok = size && *size == static_cast<std::int64_t>(m.arity) * m.value_size;
    if (a.rank() == 2) {
      shape_ok = shape_ok && a.shape[0] == m.arity && a.shape[1] == m.value_size;
    } else if (a.rank() != 1) {
      shape_ok = false;
    }
    if (!shape_ok) {
      throw InvalidArgument("argument '" + a.name + "' shape does not match arity " + std::to_string(m.arity) +
                            " x value size " + std::to_string(m.value_size));
    }
    if (m.intent == Intent::increment) {
      ++increments;
    }
  }
  if (increments != 1) {
    throw InvalidArgument("exactly one argument must have increment access, found " + std::to_string(increments));
  }

  LoopKernel w;
  w.name = local.name;
  w.parameters = {"start", "end"};
  w.domains.push_back(range(kCellIname, var("start"), var("end")));

  const auto map_names = maps.map_order();
  auto map_array = [&](const std::string& map) {
    auto it = std::find(map_names.begin(), map_names.end(), map);
    return "map" + std::to_string(it - map_names.begin());
  };
  std::map<std::string, std::string> array_names;
  for (std::size_t k = 0; k < args.size(); ++k) {
    ArrayDecl dat;
    dat.name = "dat" + std::to_string(k);
    dat.kind = ArrayKind::argument;
    dat.shape = {std::nullopt};
    dat.strides = {1};
    w.arrays.push_back(dat);
    array_names[args[k]->name] = "t" + std::to_string(k);
  }
  for (std::size_t m = 0; m < map_names.size(); ++m) {
    ArrayDecl map;
    map.name = "map" + std::to_string(m);
    map.kind = ArrayKind::argument;
    map.type = ScalarType::int32;
    map.shape = {std::nullopt};
    map.strides = {1};
    map.alignment = 4;
    w.arrays.push_back(map);
  }
  for (std::size_t k = 0; k < args.size(); ++k) {
    ArrayDecl t = *args[k];
    t.name = array_names[args[k]->name];
    t.kind = ArrayKind::temporary;
    t.strides = row_major_strides(t.shape);
    w.arrays.push_back(t);
  }
  for (const auto& a : local.arrays) {
    if (a.kind != ArrayKind::argument) {
      array_names[a.name] = kPrefix + a.name;
    }
  }

  // Gathers, zero-initialisation of the output, then the kernel body.
  std::size_t output = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    const auto& m = maps.arguments[k];
    if (m.intent == Intent::increment) {
      output = k;
      continue;
    }
    std::string node = "i" + std::to_string(k);
    std::string comp = node + "c";
    w.domains.push_back(range(node, integer(0), integer(m.arity)));
    std::vector<std::string> within = {kCellIname, node};
    if (m.value_size > 1) {
      w.domains.push_back(range(comp, integer(0), integer(m.value_size)));
      within.push_back(comp);
    }
    Expr gi = global_index(map_array(m.map), m.arity, m.value_size, var(node), var(comp));
    w.statements.push_back(statement("gather_" + std::to_string(k),
                                     Access{"t" + std::to_string(k), local_index(*args[k], m.value_size, var(node), var(comp))},
                                     AssignMode::assign, read("dat" + std::to_string(k), {gi}), within));
  }
  const auto& out = maps.arguments[output];
  const std::string out_temp = "t" + std::to_string(output);
  auto out_loops = [&](const std::string& node, const std::string& comp) {
    w.domains.push_back(range(node, integer(0), integer(out.arity)));
    std::vector<std::string> within = {kCellIname, node};
    if (out.value_size > 1) {
      w.domains.push_back(range(comp, integer(0), integer(out.value_size)));
      within.push_back(comp);
    }
    return within;
  };
  auto zero_within = out_loops("iz", "izc");
  w.statements.push_back(statement("zero_out",
                                   Access{out_temp, local_index(*args[output], out.value_size, var("iz"), var("izc"))},
                                   AssignMode::assign, real(0.0), zero_within));

  std::map<std::string, std::string> iname_names;
  for (const auto& d : local.domains) {
    iname_names[d.name] = kPrefix + d.name;
  }
  for (const auto& d : local.domains) {
    IndexVar r = d;
    r.name = iname_names[d.name];
    for (auto& e : r.lower) {
      e = rename_variables(e, iname_names);
    }
    for (auto& e : r.upper) {
      e = rename_variables(e, iname_names);
    }
    w.domains.push_back(std::move(r));
  }
  for (const auto& a : local.arrays) {
    if (a.kind != ArrayKind::argument) {
      ArrayDecl copy = a;
      copy.name = array_names[a.name];
      w.arrays.push_back(std::move(copy));
    }
  }
  auto rename = [&](const Expr& e) { return rename_variables(rename_arrays(e, array_names), iname_names); };
  for (const auto& s : local.statements) {
    Statement c = s;
    c.id = kPrefix + s.id;
    c.lhs.array = array_names.at(s.lhs.array);
    for (auto& idx : c.lhs.indices) {
      idx = rename(idx);
    }
    c.rhs = rename(s.rhs);
    c.within = {kCellIname};
    for (const auto& i : s.within) {
      c.within.push_back(iname_names.at(i));
    }
    w.statements.push_back(std::move(c));
  }

  auto scatter_within = out_loops("is", "isc");
  Expr gi = global_index(map_array(out.map), out.arity, out.value_size, var("is"), var("isc"));
  w.statements.push_back(statement(
      "scatter", Access{"dat" + std::to_string(output), {gi}}, AssignMode::increment,
      read(out_temp, local_index(*args[output], out.value_size, var("is"), var("isc"))), scatter_within));

  infer_dependencies(w);
  require_valid(w);
  return w;
}

} // namespace crossvec::transform
