#include "crossvec/harness/benchmark.hpp"

#include "crossvec/error.hpp"
#include "crossvec/harness/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace crossvec::harness {

std::int64_t flops_per_cell(const fem::OperatorSpec& spec)
{
  Mesh mesh = build_mesh(spec.cell(), 1, 1);
  DofMap dofs = build_dof_map(mesh, spec.element);
  Problem p = make_problem(spec, std::move(mesh),
                           FunctionData(static_cast<std::size_t>(dofs.ndofs_global) * spec.element.value_size, 0.5));
  auto local = fem::build_local_kernel(p.spec, p.rule);
  auto wrapper = transform::build_global_wrapper(local, maps_for(p.spec));
  ir::FlopCount flops;
  const ir::LoopKernel* kernels[] = {&wrapper};
  interpret_kernels(kernels, p, &flops);
  return flops.total() / p.ncells();
}

double arithmetic_intensity(const fem::OperatorSpec& spec, const Mesh& mesh, const DofMap& dofmap,
                            std::int64_t flops_per_cell)
{
  const double vs = spec.element.value_size;
  const double reals = 2.0 * mesh.nvertices() + vs * dofmap.ndofs_global + 2.0 * vs * dofmap.ndofs_global;
  const double ints = static_cast<double>(dofmap.cell2dof.size() + mesh.cell2vert.size());
  const double bytes = 8.0 * reals + 4.0 * ints;
  return static_cast<double>(flops_per_cell) * mesh.ncells() / bytes;
}

int native_simd_width()
{
#if defined(__x86_64__) || defined(__i386__)
  if (__builtin_cpu_supports("avx512f")) {
    return 8;
  }
  if (__builtin_cpu_supports("avx")) {
    return 4;
  }
#endif
  return 2;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_per_call(const codegen::CompiledKernel& kernel, const CompiledArguments& args, int ncells,
                        double min_seconds)
{
  long reps = 1;
  for (;;) {
    auto t0 = Clock::now();
    for (long r = 0; r < reps; ++r) {
      kernel(0, ncells, args.dats, args.maps);
    }
    double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (elapsed >= min_seconds || reps >= (1L << 30)) {
      return elapsed / static_cast<double>(reps);
    }
    reps *= elapsed > 0 ? std::clamp(static_cast<long>(std::ceil(1.2 * min_seconds / elapsed)), 2L, 64L) : 64L;
  }
}

} // namespace

BenchmarkRecord run_configuration(const Problem& p, const codegen::Target& target, const transform::BatchPlan& plan,
                                  const codegen::Toolchain& toolchain, const BenchOptions& options)
{
  if (options.trials < 1) {
    throw InvalidArgument("at least one trial is required");
  }
  codegen::check_target(target);
  const bool scalar = target.kind == codegen::TargetKind::scalar;
  const KernelSet ks = build_kernels(p, plan);
  auto unit = scalar ? codegen::emit(ks.wrapper, nullptr, {codegen::TargetKind::scalar, 1})
                     : codegen::emit(ks.batched.main, &ks.batched.remainder, {target.kind, plan.width});
  const std::string stem = std::string(fem::to_string(p.spec.form)) + "_" + fem::to_string(p.spec.cell()) + "_p" +
                           std::to_string(p.spec.degree()) + "_" + codegen::to_string(target.kind) + "_w" +
                           std::to_string(scalar ? 1 : plan.width);
  auto kernel = codegen::compile_and_load(unit, toolchain, stem);

  if (options.verify) {
    const FunctionData reference = assemble_reference(p.spec, p.mesh, p.dofmap, p.u);
    const FunctionData got = run_compiled(kernel, p);
    const bool fast_math = toolchain.flags.find("-ffast-math") != std::string::npos ||
                           toolchain.flags.find("-Ofast") != std::string::npos;
    const double tolerance = fast_math ? 1e-9 : 1e-12;
    const double err = relative_error(got, reference);
    if (!(err <= tolerance)) {
      const double abs_err = max_abs_error(got, reference);
      throw VerificationError(stem + ": relative error " + std::to_string(err) + " exceeds " +
                                  std::to_string(tolerance) + " (max abs error " + std::to_string(abs_err) + ")",
                              abs_err);
    }
  }

  BenchmarkRecord r;
  r.op = fem::to_string(p.spec.form);
  r.cell = p.spec.cell() == fem::CellKind::triangle ? "tri" : "quad";
  r.degree = p.spec.degree();
  r.target = codegen::to_string(target.kind);
  r.width = scalar ? 1 : plan.width;
  r.ncells = p.ncells();
  r.trials = options.trials;
  r.flags = toolchain.flags;
  r.seed = p.seed;
  r.flops_per_cell = flops_per_cell(p.spec);
  r.ai = arithmetic_intensity(p.spec, p.mesh, p.dofmap, r.flops_per_cell);

  FunctionData out(p.function_size(), 0.0);
  auto args = compiled_arguments(p, out);
  for (int t = 0; t < options.trials; ++t) {
    r.trial_seconds.push_back(seconds_per_call(kernel, args, p.ncells(), options.min_trial_seconds));
  }
  r.time_best_s = *std::min_element(r.trial_seconds.begin(), r.trial_seconds.end());
  r.time_mean_s = std::accumulate(r.trial_seconds.begin(), r.trial_seconds.end(), 0.0) / options.trials;
  r.gflops = static_cast<double>(r.flops_per_cell) * r.ncells / r.time_best_s * 1e-9;
  if (scalar) {
    r.speedup = 1.0;
  } else {
    double baseline = options.baseline_seconds ? *options.baseline_seconds
                                               : run_configuration(p, {codegen::TargetKind::scalar, 1}, plan,
                                                                   toolchain, options)
                                                     .time_best_s;
    r.speedup = baseline / r.time_best_s;
  }
  return r;
}

void write_csv_header(std::ostream& os)
{
  os << kCsvHeader << '\n';
}

void write_csv_row(std::ostream& os, const BenchmarkRecord& r)
{
  std::ostringstream line;
  line.precision(9);
  line << r.op << ',' << r.cell << ',' << r.degree << ',' << r.target << ',' << r.width << ',' << r.ncells << ','
       << r.trials << ',' << r.time_best_s << ',' << r.time_mean_s << ',' << r.flops_per_cell << ',' << r.gflops
       << ',' << r.ai << ',' << r.speedup << ',' << r.flags << ',' << r.seed;
  os << line.str() << '\n';
}

std::vector<BenchmarkRecord> read_csv(std::istream& is)
{
  std::vector<BenchmarkRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty() || line[0] == '#' || line.rfind("operator,", 0) == 0) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      f.push_back(field);
    }
    if (f.size() != 15) {
      throw InvalidArgument("CSV line " + std::to_string(number) + ": expected 15 fields, found " +
                            std::to_string(f.size()));
    }
    try {
      BenchmarkRecord r;
      r.op = f[0];
      r.cell = f[1];
      r.degree = std::stoi(f[2]);
      r.target = f[3];
      r.width = std::stoi(f[4]);
      r.ncells = std::stoll(f[5]);
      r.trials = std::stoi(f[6]);
      r.time_best_s = std::stod(f[7]);
      r.time_mean_s = std::stod(f[8]);
      r.flops_per_cell = std::stoll(f[9]);
      r.gflops = std::stod(f[10]);
      r.ai = std::stod(f[11]);
      r.speedup = std::stod(f[12]);
      r.flags = f[13];
      r.seed = std::stoull(f[14]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw InvalidArgument("CSV line " + std::to_string(number) + ": malformed number");
    }
  }
  return out;
}

double ridge_point(double peak_gflops, double bandwidth_gbs)
{
  if (!(peak_gflops > 0) || !(bandwidth_gbs > 0)) {
    throw InvalidArgument("peak and bandwidth must be positive");
  }
  return peak_gflops / bandwidth_gbs;
}

double attainable_gflops(double ai, double peak_gflops, double bandwidth_gbs)
{
  return std::min(peak_gflops, ai * bandwidth_gbs);
}

void roofline_report(std::ostream& os, const std::vector<BenchmarkRecord>& records, double peak_gflops,
                     double bandwidth_gbs)
{
  if (records.empty()) {
    throw InvalidArgument("no records");
  }
  std::ostringstream out;
  out.precision(9);
  out << "# peak_gflops=" << peak_gflops << " bandwidth_gbs=" << bandwidth_gbs
      << " ridge_flops_per_byte=" << ridge_point(peak_gflops, bandwidth_gbs) << '\n';
  out << kCsvHeader << ",attainable_gflops,fraction_of_attainable\n";
  for (const auto& r : records) {
    std::ostringstream row;
    write_csv_row(row, r);
    std::string text = row.str();
    text.pop_back();
    double attainable = attainable_gflops(r.ai, peak_gflops, bandwidth_gbs);
    out << text << ',' << attainable << ',' << r.gflops / attainable << '\n';
  }
  os << out.str();
}

} // namespace crossvec::harness
