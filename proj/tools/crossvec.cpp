// Command-line driver: generate sources, run the oracle chain, benchmark and
// build roofline tables.

#include "crossvec/codegen/emit.hpp"
#include "crossvec/codegen/jit.hpp"
#include "crossvec/error.hpp"
#include "crossvec/harness/benchmark.hpp"
#include "crossvec/harness/verify.hpp"
#include "crossvec/ir/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace crossvec;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kVerification = 2, kToolchain = 3 };

struct RunConfig {
  std::vector<std::string> operators;
  std::vector<std::string> cells;
  std::vector<int> degrees;
  std::vector<int> widths;
  std::vector<std::string> targets;
  int nx = 5;
  int ny = 5;
  std::uint64_t seed = 42;
  std::string compiler;
  std::string command = codegen::kDefaultCommand;
  std::string profile;
  std::string flags;
  fs::path out_dir = ".";
  int trials = 5;
  int jobs = 1;
};

struct Case {
  fem::Form form;
  fem::CellKind cell;
  int degree;
  int width;
};

std::string case_name(const Case& c)
{
  return std::string(fem::to_string(c.form)) + " " + (c.cell == fem::CellKind::triangle ? "tri" : "quad") + " p" +
         std::to_string(c.degree) + " w" + std::to_string(c.width);
}

/// Cartesian product of the requested values, validated up front so that a
/// typo fails before any work starts.
std::vector<Case> expand(const RunConfig& cfg)
{
  std::vector<Case> cases;
  for (const auto& op : cfg.operators) {
    const fem::Form form = fem::parse_form(op);
    for (const auto& cell_name : cfg.cells) {
      const fem::CellKind cell = fem::parse_cell_kind(cell_name);
      for (int degree : cfg.degrees) {
        fem::check_operator(fem::make_operator(form, cell, degree));
        for (int width : cfg.widths) {
          transform::check_plan({.width = width});
          cases.push_back({form, cell, degree, width});
        }
      }
    }
  }
  return cases;
}

std::vector<codegen::TargetKind> parse_targets(const std::vector<std::string>& names)
{
  std::vector<codegen::TargetKind> out;
  for (const auto& t : names) {
    out.push_back(codegen::parse_target_kind(t));
  }
  return out;
}

codegen::Toolchain make_toolchain(const RunConfig& cfg, bool bench_default)
{
  std::string profile = cfg.profile.empty() ? (bench_default ? "bench" : "verify") : cfg.profile;
  codegen::Toolchain tc = profile == "bench" ? codegen::Toolchain::bench() : codegen::Toolchain::verify();
  if (!cfg.compiler.empty()) {
    tc.compiler = cfg.compiler;
  }
  if (!cfg.flags.empty()) {
    tc.flags = cfg.flags;
  }
  tc.command = cfg.command;
  return tc;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads and returns the
/// results in index order. The first exception is rethrown after all tasks
/// finish.
template <class Fn>
auto run_indexed(std::size_t n, int jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))>
{
  using R = decltype(fn(std::size_t{}));
  std::vector<std::future<R>> pending;
  std::vector<R> results;
  std::size_t next = 0;
  const std::size_t limit = static_cast<std::size_t>(std::max(1, jobs));
  while (results.size() < n) {
    while (next < n && pending.size() < limit) {
      pending.push_back(std::async(std::launch::async, fn, next++));
    }
    results.push_back(pending.front().get());
    pending.erase(pending.begin());
  }
  return results;
}

/// Compilations serialize per working directory, so parallel jobs each get
/// their own.
harness::VerifyOptions job_options(harness::VerifyOptions options, const RunConfig& cfg, std::size_t index)
{
  if (cfg.jobs > 1) {
    options.toolchain.workdir = fs::temp_directory_path() / ("crossvec-" + std::to_string(::getpid())) /
                                ("job" + std::to_string(index % static_cast<std::size_t>(cfg.jobs)));
  }
  return options;
}

std::string stem_for(const Case& c, codegen::TargetKind target)
{
  return std::string(fem::to_string(c.form)) + "_" + (c.cell == fem::CellKind::triangle ? "tri" : "quad") + "_p" +
         std::to_string(c.degree) + "_" + codegen::to_string(target) + "_w" + std::to_string(c.width);
}

int cmd_generate(const RunConfig& cfg)
{
  const auto cases = expand(cfg);
  const auto targets = parse_targets(cfg.targets);
  for (const auto& c : cases) {
    for (auto target : targets) {
      codegen::check_target({target, c.width});
    }
  }
  fs::create_directories(cfg.out_dir);
  for (const auto& c : cases) {
    const auto spec = fem::make_operator(c.form, c.cell, c.degree);
    const auto rule = fem::quadrature_rule(spec.element.cell, fem::quadrature_degree(spec));
    const auto local = fem::build_local_kernel(spec, rule);
    const auto maps = harness::maps_for(spec);
    for (auto target : targets) {
      const fs::path base = cfg.out_dir / stem_for(c, target);
      codegen::EmittedUnit unit;
      std::string ir;
      if (target == codegen::TargetKind::scalar) {
        auto wrapper = transform::build_global_wrapper(local, maps);
        unit = codegen::emit(wrapper, nullptr, {target, 1});
        ir = ir::dump(wrapper);
      } else {
        auto v = transform::vectorize_pipeline(local, maps, {.width = c.width});
        unit = codegen::emit(v.main, &v.remainder, {target, c.width});
        ir = ir::dump(v.main) + ir::dump(v.remainder);
      }
      for (auto [ext, text] : {std::pair{".c", &unit.source}, std::pair{".ir", &ir}}) {
        fs::path path = base;
        path += ext;
        std::ofstream out(path, std::ios::binary);
        out << *text;
        if (!out) {
          throw Error("cannot write " + path.string());
        }
        std::cout << path.string() << '\n';
      }
    }
  }
  return kOk;
}

int cmd_verify(const RunConfig& cfg, bool interpret_only, bool inject_fault)
{
  const auto cases = expand(cfg);
  harness::VerifyOptions options;
  options.interpret_only = interpret_only;
  options.fault = inject_fault ? harness::Fault::scatter_index : harness::Fault::none;
  options.toolchain = make_toolchain(cfg, false);

  auto reports = run_indexed(cases.size(), cfg.jobs, [&](std::size_t i) {
    const Case& c = cases[i];
    auto p = harness::make_problem(c.form, c.cell, c.degree, cfg.nx, cfg.ny, cfg.seed);
    return harness::verify_configuration(p, {.width = c.width}, job_options(options, cfg, i));
  });

  std::map<std::string, double> worst;
  std::vector<std::string> stage_order;
  int failures = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& r = reports[i];
    std::ostringstream line;
    line << (r.passed() ? "PASS " : "FAIL ") << case_name(cases[i]);
    for (const auto& s : r.stages) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3e", s.relative_error);
      line << "  " << s.stage << '=' << buf;
      if (!worst.contains(s.stage)) {
        stage_order.push_back(s.stage);
        worst[s.stage] = 0.0;
      }
      worst[s.stage] = std::max(worst[s.stage], s.relative_error);
    }
    line << "  flops/cell=" << r.flops_per_cell_plain;
    if (r.flops_per_cell_plain != r.flops_per_cell_batched) {
      line << " (batched " << r.flops_per_cell_batched << ")";
    }
    if (const auto* f = r.first_failure()) {
      line << "  first failing stage: " << f->stage;
    } else if (!r.passed()) {
      line << "  first failing stage: flop-count";
    }
    std::cout << line.str() << '\n';
    failures += r.passed() ? 0 : 1;
  }
  std::cout << "max relative error per stage:\n";
  for (const auto& s : stage_order) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", worst[s]);
    std::cout << "  " << s << ' ' << buf << '\n';
  }
  std::cout << cases.size() - failures << '/' << cases.size() << " configurations passed\n";
  return failures == 0 ? kOk : kVerification;
}

int cmd_bench(const RunConfig& cfg, bool force, const std::string& csv_path)
{
  const auto cases = expand(cfg);
  auto targets = parse_targets(cfg.targets);
  // The baseline is needed for speedups, so time scalar first.
  std::stable_sort(targets.begin(), targets.end(), [](auto a, auto b) {
    return a == codegen::TargetKind::scalar && b != codegen::TargetKind::scalar;
  });
  for (const auto& c : cases) {
    for (auto target : targets) {
      codegen::check_target({target, c.width});
    }
  }

  if (!force) {
    harness::VerifyOptions options;
    options.toolchain = make_toolchain(cfg, false);
    auto reports = run_indexed(cases.size(), cfg.jobs, [&](std::size_t i) {
      const Case& c = cases[i];
      auto p = harness::make_problem(c.form, c.cell, c.degree, 5, 5, cfg.seed);
      return harness::verify_configuration(p, {.width = c.width}, job_options(options, cfg, i));
    });
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (!reports[i].passed()) {
        const auto* f = reports[i].first_failure();
        throw VerificationError("refusing to benchmark unverified configuration " + case_name(cases[i]) +
                                    " (stage " + (f ? f->stage : std::string("flop-count")) +
                                    "); pass --force to override",
                                f ? f->abs_error : 0.0);
      }
    }
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!csv_path.empty()) {
    const bool fresh = !fs::exists(csv_path) || fs::file_size(csv_path) == 0;
    file.open(csv_path, std::ios::app);
    if (!file) {
      throw Error("cannot open " + csv_path);
    }
    os = &file;
    if (fresh) {
      harness::write_csv_header(*os);
    }
  } else {
    harness::write_csv_header(*os);
  }

  const auto toolchain = make_toolchain(cfg, true);
  for (const auto& c : cases) {
    auto p = harness::make_problem(c.form, c.cell, c.degree, cfg.nx, cfg.ny, cfg.seed);
    harness::BenchOptions options;
    options.trials = cfg.trials;
    options.verify = !force;
    for (auto target : targets) {
      auto record = harness::run_configuration(p, {target, c.width}, {.width = c.width}, toolchain, options);
      if (target == codegen::TargetKind::scalar) {
        options.baseline_seconds = record.time_best_s;
      }
      harness::write_csv_row(*os, record);
      os->flush();
      std::cerr << case_name(c) << ' ' << codegen::to_string(target) << ": " << record.gflops << " GFLOP/s, speedup "
                << record.speedup << '\n';
    }
  }
  return kOk;
}

int cmd_report(const std::vector<std::string>& paths, double peak, double bandwidth, const std::string& output)
{
  std::vector<harness::BenchmarkRecord> records;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) {
      throw InvalidArgument("cannot read " + path);
    }
    auto part = harness::read_csv(in);
    records.insert(records.end(), part.begin(), part.end());
  }
  if (output.empty()) {
    harness::roofline_report(std::cout, records, peak, bandwidth);
  } else {
    std::ofstream out(output);
    harness::roofline_report(out, records, peak, bandwidth);
    if (!out) {
      throw Error("cannot write " + output);
    }
    std::cout << output << '\n';
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Cross-element vectorized finite element kernel generator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style file of option values; command-line flags take precedence");

  RunConfig cfg;
  const std::vector<std::string> all_operators{"mass", "helmholtz", "laplacian", "elasticity"};
  const std::vector<std::string> all_targets{"scalar", "pragma-simd", "vector-ext"};

  // Options shared by the configuration-driven subcommands. Operators,
  // cells, degrees, widths and targets take comma-separated lists; commands
  // run over their Cartesian product.
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--operator,--operators", cfg.operators, "mass, helmholtz, laplacian or elasticity")
        ->delimiter(',');
    sub->add_option("--cell,--cells", cfg.cells, "tri or quad")->delimiter(',');
    sub->add_option("--degree,--degrees", cfg.degrees, "polynomial degree, 1 to 4")->delimiter(',');
    sub->add_option("--width,--widths", cfg.widths, "cells per batch: 1, 2, 4, 8 or 16")->delimiter(',');
    sub->add_option("--nx", cfg.nx, "cells along x")->check(CLI::PositiveNumber);
    sub->add_option("--ny", cfg.ny, "cells along y")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed of the random coefficient");
    sub->add_option("--jobs,-j", cfg.jobs, "independent configurations built in parallel")
        ->check(CLI::PositiveNumber);
  };
  auto add_toolchain = [&](CLI::App* sub) {
    sub->add_option("--cc", cfg.compiler, "C compiler (default: $CROSSVEC_CC or cc)");
    sub->add_option("--profile", cfg.profile, "flag profile: verify (strict IEEE) or bench (fast-math)")
        ->check(CLI::IsMember({"verify", "bench"}));
    sub->add_option("--flags", cfg.flags, "compiler flags, overriding the profile");
    sub->add_option("--command", cfg.command, "compile command template with {cc} {flags} {src} {out}");
  };

  auto* generate = app.add_subcommand("generate", "Write generated C source and the IR dump");
  add_common(generate);
  generate->add_option("--target,--targets", cfg.targets, "scalar, pragma-simd or vector-ext")->delimiter(',');
  generate->add_option("--out-dir,-o", cfg.out_dir, "directory for the .c and .ir files");

  bool interpret_only = false;
  bool inject_fault = false;
  auto* verify = app.add_subcommand("verify", "Run the oracle chain; defaults to the full sweep on a 5x5 mesh");
  add_common(verify);
  add_toolchain(verify);
  verify->add_flag("--interpret-only", interpret_only, "skip compiled stages");
  verify->add_flag("--inject-fault", inject_fault, "perturb one scatter index of the batched kernel");

  bool force = false;
  std::string csv_path;
  auto* bench = app.add_subcommand("bench", "Time each target and write CSV records");
  add_common(bench);
  add_toolchain(bench);
  bench->add_option("--target,--targets", cfg.targets, "scalar, pragma-simd or vector-ext")->delimiter(',');
  bench->add_option("--trials", cfg.trials, "timed trials per target")->check(CLI::PositiveNumber);
  bench->add_option("--csv", csv_path, "append records to this file instead of stdout");
  bench->add_flag("--force", force, "benchmark without verifying first");

  std::vector<std::string> report_paths;
  double peak = 0.0;
  double bandwidth = 0.0;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Add roofline columns to benchmark CSV files");
  report->add_option("csv", report_paths, "benchmark CSV files")->required();
  report->add_option("--peak", peak, "peak GFLOP/s")->required()->check(CLI::PositiveNumber);
  report->add_option("--bandwidth", bandwidth, "memory bandwidth in GB/s")->required()->check(CLI::PositiveNumber);
  report->add_option("--output", report_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  auto fill = [](auto& v, const auto& defaults) {
    if (v.empty()) {
      v.assign(defaults.begin(), defaults.end());
    }
  };

  try {
    if (generate->parsed()) {
      if (cfg.operators.empty()) {
        throw InvalidArgument("generate needs --operator (one of mass, helmholtz, laplacian, elasticity)");
      }
      fill(cfg.cells, std::vector<std::string>{"tri"});
      fill(cfg.degrees, std::vector<int>{1});
      fill(cfg.widths, std::vector<int>{4});
      fill(cfg.targets, std::vector<std::string>{"vector-ext"});
      return cmd_generate(cfg);
    }
    if (verify->parsed()) {
      fill(cfg.operators, all_operators);
      fill(cfg.cells, std::vector<std::string>{"tri", "quad"});
      fill(cfg.degrees, std::vector<int>{1, 2, 3});
      fill(cfg.widths, std::vector<int>{1, 4, 8});
      return cmd_verify(cfg, interpret_only, inject_fault);
    }
    if (bench->parsed()) {
      if (cfg.operators.empty()) {
        throw InvalidArgument("bench needs --operator (one of mass, helmholtz, laplacian, elasticity)");
      }
      fill(cfg.cells, std::vector<std::string>{"tri"});
      fill(cfg.degrees, std::vector<int>{1});
      fill(cfg.widths, std::vector<int>{harness::native_simd_width()});
      fill(cfg.targets, all_targets);
      // Timing wants a mesh well beyond the cache-resident verification size.
      if (bench->get_option("--nx")->count() == 0) {
        cfg.nx = 64;
      }
      if (bench->get_option("--ny")->count() == 0) {
        cfg.ny = 64;
      }
      return cmd_bench(cfg, force, csv_path);
    }
    return cmd_report(report_paths, peak, bandwidth, report_out);
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerification;
  } catch (const ToolchainError& e) {
    std::cerr << "toolchain error: " << e.what() << '\n';
    return kToolchain;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
