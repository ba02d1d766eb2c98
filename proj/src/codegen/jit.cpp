#include "crossvec/codegen/jit.hpp"

#include "crossvec/error.hpp"

#include <dlfcn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace crossvec::codegen {

namespace fs = std::filesystem;

std::string Toolchain::default_compiler()
{
  const char* cc = std::getenv("CROSSVEC_CC");
  return cc && *cc ? cc : "cc";
}

Toolchain Toolchain::verify()
{
  Toolchain t;
  t.flags = kVerifyFlags;
  return t;
}

Toolchain Toolchain::bench()
{
  Toolchain t;
  t.flags = kBenchFlags;
  return t;
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to)
{
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string quote(const fs::path& p)
{
  std::string s = p.string();
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

/// One lock per working directory: compilations into distinct directories
/// may run concurrently.
std::mutex& compile_mutex(const fs::path& dir)
{
  static std::mutex guard;
  static std::map<fs::path, std::unique_ptr<std::mutex>> locks;
  std::lock_guard lock(guard);
  auto& m = locks[fs::absolute(dir)];
  if (!m) {
    m = std::make_unique<std::mutex>();
  }
  return *m;
}

fs::path default_workdir()
{
  fs::path dir = fs::temp_directory_path() / ("crossvec-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::string Toolchain::render(const fs::path& src, const fs::path& out) const
{
  std::string cmd = command;
  replace_all(cmd, "{cc}", compiler);
  replace_all(cmd, "{flags}", flags);
  replace_all(cmd, "{src}", quote(src));
  replace_all(cmd, "{out}", quote(out));
  return cmd;
}

CompiledKernel::CompiledKernel(std::shared_ptr<void> library, PackedFn fn, std::string flags, std::string command)
    : library_(std::move(library)), fn_(fn), flags_(std::move(flags)), command_(std::move(command))
{
}

void CompiledKernel::operator()(int start, int end, std::span<double* const> dats,
                                std::span<const std::int32_t* const> maps) const
{
  fn_(start, end, dats.data(), maps.data());
}

CompiledKernel compile_and_load(const EmittedUnit& unit, const Toolchain& toolchain, std::string stem)
{
  static std::atomic<unsigned> counter{0};
  fs::path dir = toolchain.workdir.empty() ? default_workdir() : toolchain.workdir;
  fs::create_directories(dir);
  if (stem.empty()) {
    stem = unit.entry;
  }
  const std::string unique = stem + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
  const fs::path src = dir / (unique + ".c");
  const fs::path lib = dir / (unique + ".so");
  const fs::path log = dir / (unique + ".log");
  {
    std::ofstream out(src, std::ios::binary);
    out << unit.source;
    if (!out) {
      throw ToolchainError("cannot write " + src.string());
    }
  }

  const std::string cmd = toolchain.render(src, lib);
  int status = 0;
  {
    std::lock_guard lock(compile_mutex(dir));
    // A subshell so that compound commands have all of their output captured.
    status = std::system(("(" + cmd + ") > " + quote(log) + " 2>&1").c_str());
  }
  std::string output = read_file(log);
  fs::remove(log);
  int exit_status = status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status));
  if (exit_status != 0) {
    throw ToolchainError("compilation failed with exit status " + std::to_string(exit_status) + ": " + cmd + "\n" +
                             output,
                         exit_status, output);
  }

  void* handle = ::dlopen(lib.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!handle) {
    const char* err = ::dlerror();
    throw ToolchainError(std::string("cannot load ") + lib.string() + ": " + (err ? err : "unknown error"));
  }
  std::shared_ptr<void> library(handle, [](void* h) { ::dlclose(h); });
  ::dlerror();
  void* sym = ::dlsym(handle, unit.packed_entry.c_str());
  if (!sym) {
    throw ToolchainError("symbol '" + unit.packed_entry + "' not found in " + lib.string());
  }
  // The mapping stays valid after the file is unlinked.
  fs::remove(lib);
  if (!toolchain.keep_source) {
    fs::remove(src);
  }
  return CompiledKernel(std::move(library), reinterpret_cast<CompiledKernel::PackedFn>(sym), toolchain.flags, cmd);
}

} // namespace crossvec::codegen
