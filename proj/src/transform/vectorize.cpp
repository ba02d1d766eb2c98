#include "crossvec/transform/vectorize.hpp"

#include "crossvec/error.hpp"
#include "crossvec/ir/validate.hpp"

#include <algorithm>
#include <map>

namespace crossvec::transform {

using namespace crossvec::ir;

void check_plan(const BatchPlan& plan)
{
  static constexpr int widths[] = {1, 2, 4, 8, 16};
  if (std::find(std::begin(widths), std::end(widths), plan.width) == std::end(widths)) {
    throw InvalidArgument("unsupported batch width " + std::to_string(plan.width) + " (expected 1, 2, 4, 8 or 16)");
  }
  if (plan.alignment < 8 || (plan.alignment & (plan.alignment - 1)) != 0) {
    throw InvalidArgument("alignment must be a power of two of at least 8 bytes");
  }
  if (!is_identifier(plan.lane_iname)) {
    throw InvalidArgument("lane iname '" + plan.lane_iname + "' is not an identifier");
  }
}

namespace {

/// Simplify every index expression below `e`, leaving real arithmetic intact
/// so no floating-point operation is reassociated.
Expr simplify_indices(const Expr& e)
{
  return rewrite(e, [](const Expr& x) -> std::optional<Expr> {
    if (const auto* r = as<ArrayRead>(x)) {
      std::vector<Expr> indices;
      for (const auto& idx : r->indices) {
        indices.push_back(simplify_affine(simplify_indices(idx)));
      }
      return read(r->array, std::move(indices));
    }
    return std::nullopt;
  });
}

bool is_argument(const LoopKernel& k, const std::string& array)
{
  const auto* a = k.find_array(array);
  return a && a->kind == ArrayKind::argument;
}

bool lane_dependent_map_read(const Expr& e, const std::string& lane)
{
  bool found = false;
  visit(e, [&](const Expr& x) {
    if (const auto* r = as<ArrayRead>(x)) {
      for (const auto& idx : r->indices) {
        if (mentions_variable(idx, lane)) {
          found = true;
        }
      }
    }
  });
  return found;
}

std::optional<std::int64_t> constant_trip_count(const IndexVar& d)
{
  std::optional<std::int64_t> lo;
  std::optional<std::int64_t> hi;
  for (const auto& e : d.lower) {
    auto v = constant_value(e);
    if (!v) {
      return std::nullopt;
    }
    lo = lo ? std::max(*lo, *v) : *v;
  }
  for (const auto& e : d.upper) {
    auto v = constant_value(e);
    if (!v) {
      return std::nullopt;
    }
    hi = hi ? std::min(*hi, *v) : *v;
  }
  if (!lo || !hi) {
    return std::nullopt;
  }
  return std::max<std::int64_t>(0, *hi - *lo);
}

} // namespace

LoopKernel split_iname(const LoopKernel& kernel, const std::string& iname, int factor, std::string lane)
{
  const IndexVar* old = kernel.find_iname(iname);
  if (!old) {
    throw InvalidArgument("cannot split unknown iname '" + iname + "'");
  }
  if (factor < 1) {
    throw InvalidArgument("split factor must be at least 1, got " + std::to_string(factor));
  }
  if (old->is_simd()) {
    throw InvalidArgument("cannot split iname '" + iname + "': it is already tagged simd");
  }
  const std::string outer = iname + "_outer";
  if (lane.empty()) {
    lane = iname + "_simd";
  }
  for (const auto& name : {outer, lane}) {
    if (kernel.find_iname(name) || kernel.find_array(name) || kernel.is_parameter(name)) {
      throw InvalidArgument("cannot split '" + iname + "': name '" + name + "' is already in use");
    }
  }

  const Expr f = integer(factor);
  IndexVar o;
  o.name = outer;
  for (const auto& e : old->lower) {
    o.lower.push_back(simplify_affine(floordiv(e, f)));
  }
  for (const auto& e : old->upper) {
    o.upper.push_back(simplify_affine(floordiv(e + integer(factor - 1), f)));
  }
  IndexVar l;
  l.name = lane;
  l.lower.push_back(integer(0));
  for (const auto& e : old->lower) {
    l.lower.push_back(simplify_affine(e - f * var(outer)));
  }
  l.upper.push_back(f);
  for (const auto& e : old->upper) {
    l.upper.push_back(simplify_affine(e - f * var(outer)));
  }

  LoopKernel k = kernel;
  auto pos = std::find_if(k.domains.begin(), k.domains.end(), [&](const IndexVar& d) { return d.name == iname; });
  pos = k.domains.erase(pos);
  pos = k.domains.insert(pos, std::move(l));
  k.domains.insert(pos, std::move(o));

  const std::map<std::string, Expr> replacement = {{iname, f * var(outer) + var(lane)}};
  // Bounds of the new pair are already in terms of outer; only rewrite the rest.
  for (auto& d : k.domains) {
    if (d.name == outer || d.name == lane) {
      continue;
    }
    for (auto& e : d.lower) {
      e = simplify_affine(substitute(e, replacement));
    }
    for (auto& e : d.upper) {
      e = simplify_affine(substitute(e, replacement));
    }
  }
  for (auto& s : k.statements) {
    for (auto& idx : s.lhs.indices) {
      idx = simplify_affine(simplify_indices(substitute(idx, replacement)));
    }
    s.rhs = simplify_indices(substitute(s.rhs, replacement));
    auto it = std::find(s.within.begin(), s.within.end(), iname);
    if (it != s.within.end()) {
      it = s.within.erase(it);
      it = s.within.insert(it, lane);
      s.within.insert(it, outer);
    }
  }
  return k;
}

LoopKernel restrict_to_full_batches(const LoopKernel& kernel, const std::string& outer, const std::string& lane,
                                    int factor)
{
  LoopKernel k = kernel;
  IndexVar* o = k.find_iname(outer);
  IndexVar* l = k.find_iname(lane);
  if (!o || !l) {
    throw InvalidArgument("restrict_to_full_batches: unknown iname '" + (o ? lane : outer) + "'");
  }
  if (o->lower.size() != 1 || o->upper.size() != 1 || l->lower.size() != 2 || l->upper.size() != 2) {
    throw InvalidArgument("restrict_to_full_batches: '" + outer + "' and '" + lane +
                          "' do not look like a freshly split pair");
  }
  // The original bounds are recovered from the lane's coupled bounds:
  // lane >= L - f*outer and lane < U - f*outer.
  const Expr shift = integer(factor) * var(outer);
  Expr L = simplify_affine(l->lower[1] + shift);
  Expr U = simplify_affine(l->upper[1] + shift);
  o->lower = {simplify_affine(floordiv(L + integer(factor - 1), integer(factor)))};
  o->upper = {simplify_affine(floordiv(U, integer(factor)))};
  l->lower = {integer(0)};
  l->upper = {integer(factor)};
  return k;
}

std::set<std::string> detect_races(const LoopKernel& kernel, const std::string& lane)
{
  kernel.iname(lane);
  std::set<std::string> out;
  for (const auto& s : kernel.statements) {
    if (s.mode != AssignMode::increment || !is_argument(kernel, s.lhs.array)) {
      continue;
    }
    for (const auto& idx : s.lhs.indices) {
      if (lane_dependent_map_read(idx, lane)) {
        out.insert(s.id);
        break;
      }
    }
  }
  return out;
}

LoopKernel tag_simd(const LoopKernel& kernel, const std::string& lane, const BatchPlan& plan)
{
  check_plan(plan);
  const IndexVar& d = kernel.iname(lane);
  if (d.is_simd()) {
    throw InvalidArgument("iname '" + lane + "' is already tagged simd");
  }
  auto trip = constant_trip_count(d);
  if (!trip) {
    throw InvalidArgument("iname '" + lane + "' does not have a constant trip count");
  }
  if (*trip != plan.width) {
    throw InvalidArgument("iname '" + lane + "' has trip count " + std::to_string(*trip) +
                          " but the batch width is " + std::to_string(plan.width));
  }
  for (const auto& other : kernel.domains) {
    if (other.is_simd()) {
      throw InvalidArgument("kernel already has simd iname '" + other.name + "'");
    }
  }
  const auto races = detect_races(kernel, lane);

  LoopKernel k = kernel;
  k.find_iname(lane)->tag = SimdTag{plan.width};

  std::set<std::string> expand;
  for (auto& s : k.statements) {
    if (!s.is_within(lane)) {
      continue;
    }
    if (k.array(s.lhs.array).kind == ArrayKind::temporary) {
      expand.insert(s.lhs.array);
    }
    if (!races.count(s.id)) {
      s.within.erase(std::find(s.within.begin(), s.within.end(), lane));
      s.within.push_back(lane);
    }
  }
  const std::int64_t w = plan.width;
  for (auto& a : k.arrays) {
    if (!expand.count(a.name)) {
      continue;
    }
    for (auto& stride : a.strides) {
      stride *= w;
    }
    a.shape.emplace_back(w);
    a.strides.push_back(1);
    a.alignment = plan.alignment;
    a.lane_expanded = true;
  }
  const Expr l = var(lane);
  auto extend = [&](const Expr& e) {
    return rewrite(e, [&](const Expr& x) -> std::optional<Expr> {
      if (const auto* r = as<ArrayRead>(x); r && expand.count(r->array)) {
        std::vector<Expr> indices = r->indices;
        indices.push_back(l);
        return read(r->array, std::move(indices));
      }
      return std::nullopt;
    });
  };
  for (auto& s : k.statements) {
    bool touches = expand.count(s.lhs.array) > 0;
    visit(s.rhs, [&](const Expr& x) {
      if (const auto* r = as<ArrayRead>(x); r && expand.count(r->array)) {
        touches = true;
      }
    });
    if (touches && !s.is_within(lane)) {
      throw InvalidArgument("statement '" + s.id + "' uses a lane-private temporary outside the lane loop");
    }
    s.rhs = extend(s.rhs);
    for (auto& idx : s.lhs.indices) {
      idx = extend(idx);
    }
    if (expand.count(s.lhs.array)) {
      s.lhs.indices.push_back(l);
    }
  }
  return k;
}

namespace {

/// Copy of the cell-loop statements of `wrapper` over a renamed cell iname.
void append_copy(LoopKernel& out, const LoopKernel& wrapper, const std::string& cell, const std::string& suffix,
                 std::vector<Expr> lower, std::vector<Expr> upper)
{
  IndexVar d;
  d.name = cell;
  d.lower = std::move(lower);
  d.upper = std::move(upper);
  out.domains.push_back(std::move(d));
  const std::map<std::string, std::string> names = {{kCellIname, cell}};
  for (const auto& s : wrapper.statements) {
    Statement c = s;
    c.id += suffix;
    for (auto& dep : c.depends_on) {
      dep += suffix;
    }
    c.rhs = rename_variables(c.rhs, names);
    for (auto& idx : c.lhs.indices) {
      idx = rename_variables(idx, names);
    }
    for (auto& i : c.within) {
      if (i == kCellIname) {
        i = cell;
      }
    }
    out.statements.push_back(std::move(c));
  }
}

} // namespace

VectorizedKernels vectorize_wrapper(const LoopKernel& wrapper, const BatchPlan& plan)
{
  check_plan(plan);
  const IndexVar& cell = wrapper.iname(kCellIname);
  if (cell.lower.size() != 1 || cell.upper.size() != 1) {
    throw InvalidArgument("wrapper cell iname must have single lower and upper bounds");
  }
  const int w = plan.width;
  const std::string outer = std::string(kCellIname) + "_outer";
  LoopKernel split = split_iname(wrapper, kCellIname, w, plan.lane_iname);
  LoopKernel full = restrict_to_full_batches(split, outer, plan.lane_iname, w);
  VectorizedKernels out;
  out.main = tag_simd(full, plan.lane_iname, plan);

  // Cells outside the full batches: [L, first) in front, [last, U) behind.
  const Expr L = cell.lower[0];
  const Expr U = cell.upper[0];
  const Expr first = simplify_affine(integer(w) * floordiv(L + integer(w - 1), integer(w)));
  const Expr last = simplify_affine(integer(w) * floordiv(U, integer(w)));
  LoopKernel rem = wrapper;
  rem.domains.erase(std::find_if(rem.domains.begin(), rem.domains.end(),
                                 [](const IndexVar& d) { return d.name == kCellIname; }));
  rem.statements.clear();
  append_copy(rem, wrapper, "n_head", "_head", {L}, {U, first});
  append_copy(rem, wrapper, "n_tail", "_tail", {L, first, last}, {U});
  infer_dependencies(rem);
  out.remainder = std::move(rem);
  require_valid(out.main);
  require_valid(out.remainder);
  return out;
}

VectorizedKernels vectorize_pipeline(const LoopKernel& local, const MapsSpec& maps, const BatchPlan& plan)
{
  return vectorize_wrapper(build_global_wrapper(local, maps), plan);
}

} // namespace crossvec::transform
