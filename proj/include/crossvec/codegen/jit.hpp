#pragma once

#include "crossvec/codegen/emit.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>

namespace crossvec::codegen {

/// Optimisation with fast-math, for timing.
inline constexpr const char* kBenchFlags = "-O3 -ffast-math -fopenmp -march=native";
/// IEEE-strict variant used when results are compared against the oracles.
inline constexpr const char* kVerifyFlags = "-O3 -fopenmp -march=native -ffp-contract=off";
inline constexpr const char* kDefaultCommand = "{cc} {flags} -shared -fPIC -o {out} {src}";

struct Toolchain {
  /// Compiler executable; CROSSVEC_CC overrides the default "cc".
  std::string compiler = default_compiler();
  std::string flags = kVerifyFlags;
  /// Placeholders: {cc}, {flags}, {src}, {out}.
  std::string command = kDefaultCommand;
  /// Where sources and objects are written; a per-process temp dir if empty.
  std::filesystem::path workdir;
  /// Keep the generated source next to the shared object after loading.
  bool keep_source = false;

  static std::string default_compiler();
  static Toolchain verify();
  static Toolchain bench();

  /// The command line that will compile `src` into `out`.
  std::string render(const std::filesystem::path& src, const std::filesystem::path& out) const;
};

/// A loaded wrapper. Copies share the underlying library handle.
class CompiledKernel {
public:
  using PackedFn = void (*)(int, int, double* const*, const int* const*);

  CompiledKernel(std::shared_ptr<void> library, PackedFn fn, std::string flags, std::string command);

  /// `dats` and `maps` follow the unit's argument order.
  void operator()(int start, int end, std::span<double* const> dats, std::span<const std::int32_t* const> maps) const;

  const std::string& flags() const noexcept { return flags_; }
  const std::string& command() const noexcept { return command_; }

private:
  std::shared_ptr<void> library_;
  PackedFn fn_;
  std::string flags_;
  std::string command_;
};

/// Compile with the external toolchain and resolve the packed entry point.
/// Throws ToolchainError with the exit status and compiler output on failure.
CompiledKernel compile_and_load(const EmittedUnit& unit, const Toolchain& toolchain, std::string stem = {});

} // namespace crossvec::codegen
