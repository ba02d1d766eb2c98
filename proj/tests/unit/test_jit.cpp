#include "crossvec/codegen/jit.hpp"
#include "crossvec/error.hpp"
#include "crossvec/harness/verify.hpp"

#include <gtest/gtest.h>

using namespace crossvec;
using namespace crossvec::codegen;

TEST(Jit, ScalarMassMatchesInterpreter)
{
  auto p = harness::make_problem(fem::Form::mass, fem::CellKind::triangle, 1, 5, 1, 42);
  ASSERT_EQ(p.ncells(), 10);
  auto ks = harness::build_kernels(p, {.width = 4});
  auto kernel = compile_and_load(emit(ks.wrapper, nullptr, {TargetKind::scalar, 1}), Toolchain::verify());
  auto compiled = harness::run_compiled(kernel, p);
  std::vector<const ir::LoopKernel*> plain{&ks.wrapper};
  auto interpreted = harness::interpret_kernels(plain, p);
  EXPECT_LE(harness::relative_error(compiled, interpreted), 1e-15);
  EXPECT_EQ(kernel.flags(), kVerifyFlags);
}

TEST(Jit, VectorExtensionsAgreeAcrossOptimisationLevels)
{
  auto p = harness::make_problem(fem::Form::helmholtz, fem::CellKind::quadrilateral, 2, 5, 3, 7);
  auto ks = harness::build_kernels(p, {.width = 4});
  auto unit = emit(ks.batched.main, &ks.batched.remainder, {TargetKind::vector_ext, 4});
  Toolchain o0 = Toolchain::verify();
  o0.flags = "-O0 -fopenmp";
  auto slow = harness::run_compiled(compile_and_load(unit, o0), p);
  auto fast = harness::run_compiled(compile_and_load(unit, Toolchain::verify()), p);
  EXPECT_LE(harness::relative_error(fast, slow), 1e-15);
}

TEST(Jit, CompilerFailureCarriesStatusAndOutput)
{
  auto p = harness::make_problem(fem::Form::mass, fem::CellKind::triangle, 1, 1, 1, 1);
  auto ks = harness::build_kernels(p, {.width = 4});
  auto unit = emit(ks.wrapper, nullptr, {TargetKind::scalar, 1});
  Toolchain t = Toolchain::verify();
  t.command = "echo broken-toolchain-output >&2; exit 3";
  try {
    compile_and_load(unit, t);
    FAIL() << "expected ToolchainError";
  } catch (const ToolchainError& e) {
    EXPECT_EQ(e.exit_status(), 3);
    EXPECT_NE(e.diagnostics().find("broken-toolchain-output"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("exit status 3"), std::string::npos);
  }
}

TEST(Jit, BadSourceReportsCompilerDiagnostics)
{
  EmittedUnit unit;
  unit.source = "this is not C;\n";
  unit.entry = "broken";
  unit.packed_entry = "broken_packed";
  try {
    compile_and_load(unit, Toolchain::verify());
    FAIL() << "expected ToolchainError";
  } catch (const ToolchainError& e) {
    EXPECT_NE(e.exit_status(), 0);
    EXPECT_FALSE(e.diagnostics().empty());
  }
}

TEST(Jit, MissingSymbol)
{
  EmittedUnit unit;
  unit.source = "void something_else(void) {}\n";
  unit.entry = "absent";
  unit.packed_entry = "absent_packed";
  EXPECT_THROW(compile_and_load(unit, Toolchain::verify()), ToolchainError);
}

TEST(Jit, CommandPlaceholders)
{
  Toolchain t;
  t.compiler = "gcc";
  t.flags = "-O2";
  EXPECT_EQ(t.render("/tmp/a b.c", "/tmp/x.so"), "gcc -O2 -shared -fPIC -o '/tmp/x.so' '/tmp/a b.c'");
}
