#pragma once

#include "crossvec/codegen/jit.hpp"
#include "crossvec/harness/problem.hpp"
#include "crossvec/transform/vectorize.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace crossvec::harness {

struct BenchmarkRecord {
  std::string op;
  std::string cell;
  int degree = 0;
  std::string target;
  int width = 1;
  std::int64_t ncells = 0;
  int trials = 0;
  /// Seconds per wrapper call, one entry per trial.
  std::vector<double> trial_seconds;
  double time_best_s = 0.0;
  double time_mean_s = 0.0;
  std::int64_t flops_per_cell = 0;
  double gflops = 0.0;
  double ai = 0.0;
  double speedup = 1.0;
  std::string flags;
  std::uint64_t seed = 0;
};

struct BenchOptions {
  int trials = 5;
  /// Each trial repeats the call until it has run at least this long.
  double min_trial_seconds = 0.05;
  /// Best time of the scalar baseline; measured on demand when empty.
  std::optional<double> baseline_seconds;
  /// Compare the compiled residual against the reference before timing.
  bool verify = true;
};

/// Doubles per SIMD register on the running CPU: 8 with AVX-512, 4 with AVX,
/// otherwise 2.
int native_simd_width();

/// Flops per cell of the plain wrapper, counted by interpreting a tiny mesh.
std::int64_t flops_per_cell(const fem::OperatorSpec& spec);

/// Flops per byte, where bytes are the unique global data touched by one
/// sweep amortised over the mesh (coordinates, coefficient, output read and
/// written, both maps), i.e. assuming perfect caching. Batching does not
/// change the traffic.
double arithmetic_intensity(const fem::OperatorSpec& spec, const Mesh& mesh, const DofMap& dofmap,
                            std::int64_t flops_per_cell);

/// Verify, then time, one target: scalar runs the plain wrapper, the other
/// targets the batched kernels of `plan`. Unless disabled in `options`,
/// throws VerificationError when the compiled residual misses the reference
/// (1e-12 relative, 1e-9 with -ffast-math).
BenchmarkRecord run_configuration(const Problem& p, const codegen::Target& target, const transform::BatchPlan& plan,
                                  const codegen::Toolchain& toolchain, const BenchOptions& options = {});

inline constexpr const char* kCsvHeader =
    "operator,cell,degree,target,width,ncells,trials,time_best_s,time_mean_s,flops_per_cell,gflops,ai,speedup,flags,"
    "seed";

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const BenchmarkRecord& r);
/// Reads rows written by write_csv_row; lines starting with '#' are skipped.
std::vector<BenchmarkRecord> read_csv(std::istream& is);

double ridge_point(double peak_gflops, double bandwidth_gbs);
double attainable_gflops(double ai, double peak_gflops, double bandwidth_gbs);

/// CSV of the records extended with attainable performance and the fraction
/// of it achieved, preceded by a '#' metadata line with the ridge point.
void roofline_report(std::ostream& os, const std::vector<BenchmarkRecord>& records, double peak_gflops,
                     double bandwidth_gbs);

} // namespace crossvec::harness
