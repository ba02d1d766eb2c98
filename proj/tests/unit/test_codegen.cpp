#include "crossvec/codegen/emit.hpp"
#include "crossvec/error.hpp"
#include "crossvec/harness/problem.hpp"
#include "crossvec/transform/vectorize.hpp"

#include <gtest/gtest.h>

#include <regex>
#include <sstream>

using namespace crossvec;
using namespace crossvec::codegen;

namespace {

transform::VectorizedKernels batched(fem::Form form, fem::CellKind cell, int degree, int width)
{
  auto spec = fem::make_operator(form, cell, degree);
  auto rule = fem::quadrature_rule(spec.element.cell, fem::quadrature_degree(spec));
  return transform::vectorize_pipeline(fem::build_local_kernel(spec, rule), harness::maps_for(spec),
                                       {.width = width});
}

ir::LoopKernel plain(fem::Form form, fem::CellKind cell, int degree)
{
  auto spec = fem::make_operator(form, cell, degree);
  auto rule = fem::quadrature_rule(spec.element.cell, fem::quadrature_degree(spec));
  return transform::build_global_wrapper(fem::build_local_kernel(spec, rule), harness::maps_for(spec));
}

std::vector<std::string> lines_of(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    out.push_back(line);
  }
  return out;
}

struct LaneLoop {
  bool has_pragma = false;
  bool scatters = false;
};

// Lane loops of the batched block, each with whether a pragma precedes it
// and whether its body increments the output through a map.
std::vector<LaneLoop> lane_loops(const std::string& source)
{
  auto lines = lines_of(source.substr(0, source.find("// cells outside")));
  std::vector<LaneLoop> loops;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("for (int n_simd") == std::string::npos) {
      continue;
    }
    LaneLoop loop;
    loop.has_pragma = i > 0 && lines[i - 1].find("#pragma omp simd") != std::string::npos;
    int depth = 0;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      for (char c : lines[j]) {
        depth += c == '{' ? 1 : c == '}' ? -1 : 0;
      }
      if (lines[j].find("dat0[") != std::string::npos && lines[j].find("+=") != std::string::npos) {
        loop.scatters = true;
      }
      if (depth == 0) {
        break;
      }
    }
    loops.push_back(loop);
  }
  return loops;
}

} // namespace

TEST(Codegen, PragmaOnEveryLaneLoopButTheScatter)
{
  for (auto target : {TargetKind::pragma_simd, TargetKind::vector_ext}) {
    auto v = batched(fem::Form::helmholtz, fem::CellKind::triangle, 2, 4);
    auto unit = emit(v.main, &v.remainder, {target, 4});
    auto loops = lane_loops(unit.source);
    ASSERT_FALSE(loops.empty());
    int scatters = 0;
    for (const auto& l : loops) {
      if (l.scatters) {
        ++scatters;
        EXPECT_FALSE(l.has_pragma);
      } else {
        EXPECT_TRUE(l.has_pragma);
      }
    }
    EXPECT_EQ(scatters, 1) << to_string(target);
  }
}

TEST(Codegen, VectorExtensionDeclarations)
{
  auto v = batched(fem::Form::mass, fem::CellKind::triangle, 1, 4);
  auto unit = emit(v.main, &v.remainder, {TargetKind::vector_ext, 4});
  const auto& s = unit.source;
  EXPECT_NE(s.find("typedef double double4 __attribute__ ((vector_size (32)));"), std::string::npos);
  EXPECT_NE(s.find("_zeros_double4"), std::string::npos);
  // Whole-vector zeroing instead of a lane loop of scalar stores.
  EXPECT_NE(s.find("t0[iz] = _zeros_double4;"), std::string::npos);

  auto w8 = batched(fem::Form::mass, fem::CellKind::quadrilateral, 2, 8);
  auto unit8 = emit(w8.main, &w8.remainder, {TargetKind::vector_ext, 8});
  EXPECT_NE(unit8.source.find("vector_size (64)"), std::string::npos);
}

TEST(Codegen, LaneExpandedTemporariesAreAligned)
{
  for (auto target : {TargetKind::pragma_simd, TargetKind::vector_ext}) {
    auto v = batched(fem::Form::elasticity, fem::CellKind::quadrilateral, 2, 4);
    auto unit = emit(v.main, &v.remainder, {target, 4});
    int lane_arrays = 0;
    for (const auto& a : v.main.arrays) {
      if (a.kind != ir::ArrayKind::temporary || !a.lane_expanded) {
        continue;
      }
      ++lane_arrays;
      std::regex decl("\\n  double4? " + a.name + "(\\[\\d+\\])? __attribute__ \\(\\(aligned \\(64\\)\\)\\);");
      EXPECT_TRUE(std::regex_search(unit.source, decl)) << a.name << " / " << to_string(target);
    }
    EXPECT_GE(lane_arrays, 3);
  }
}

TEST(Codegen, ScalarHasNoVectorConstructs)
{
  auto unit = emit(plain(fem::Form::laplacian, fem::CellKind::triangle, 3), nullptr, {TargetKind::scalar, 1});
  EXPECT_EQ(unit.source.find("#pragma"), std::string::npos);
  EXPECT_EQ(unit.source.find("typedef"), std::string::npos);
  EXPECT_EQ(unit.source.find("vector_size"), std::string::npos);
  EXPECT_EQ(unit.entry, "wrap_laplacian");
  EXPECT_EQ(unit.packed_entry, "wrap_laplacian_packed");
}

TEST(Codegen, WidthOneVectorExtLowersLikePragma)
{
  auto v = batched(fem::Form::mass, fem::CellKind::triangle, 2, 1);
  auto vec = emit(v.main, &v.remainder, {TargetKind::vector_ext, 1});
  EXPECT_EQ(vec.source.find("typedef"), std::string::npos);
}

TEST(Codegen, Deterministic)
{
  auto a = batched(fem::Form::helmholtz, fem::CellKind::quadrilateral, 3, 8);
  auto b = batched(fem::Form::helmholtz, fem::CellKind::quadrilateral, 3, 8);
  EXPECT_EQ(emit(a.main, &a.remainder, {TargetKind::vector_ext, 8}).source,
            emit(b.main, &b.remainder, {TargetKind::vector_ext, 8}).source);
}

TEST(Codegen, ArgumentOrder)
{
  auto unit = emit(plain(fem::Form::mass, fem::CellKind::triangle, 1), nullptr, {TargetKind::scalar, 1});
  ASSERT_EQ(unit.arguments.size(), 5u);
  EXPECT_EQ(unit.arguments[0].name, "dat0");
  EXPECT_TRUE(unit.arguments[0].written);
  EXPECT_FALSE(unit.arguments[1].written);
  EXPECT_EQ(unit.arguments[3].name, "map0");
  EXPECT_EQ(unit.arguments[3].type, ir::ScalarType::int32);
  EXPECT_EQ(unit.arguments[4].name, "map1");
}

TEST(Codegen, TargetChecks)
{
  EXPECT_NO_THROW(check_target({TargetKind::vector_ext, 2}));
  EXPECT_NO_THROW(check_target({TargetKind::vector_ext, 8}));
  EXPECT_NO_THROW(check_target({TargetKind::vector_ext, 1}));
  EXPECT_THROW(check_target({TargetKind::vector_ext, 3}), InvalidArgument);
  EXPECT_THROW(check_target({TargetKind::vector_ext, 16}), InvalidArgument);
  EXPECT_THROW(check_target({TargetKind::pragma_simd, 0}), InvalidArgument);
  EXPECT_EQ(parse_target_kind("pragma"), TargetKind::pragma_simd);
  EXPECT_THROW(parse_target_kind("avx"), InvalidArgument);
}

TEST(Codegen, WidthMismatchRejected)
{
  auto v = batched(fem::Form::mass, fem::CellKind::triangle, 1, 4);
  EXPECT_THROW(emit(v.main, &v.remainder, {TargetKind::pragma_simd, 8}), InvalidArgument);
}
