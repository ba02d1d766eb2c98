#pragma once

// Randomized wrapper-shaped kernels for checking that loop transformations
// keep interpreter output unchanged.

#include "crossvec/ir/interpret.hpp"
#include "crossvec/ir/kernel.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

/// A kernel over the cell iname "n" with gathers through a map, scalar and
/// per-entry temporaries, a direct per-cell output, a per-cell visit counter
/// and a racing scatter-add, plus inputs sized for it.
struct RandomCase {
  crossvec::ir::LoopKernel kernel;
  std::int64_t start = 0;
  std::int64_t end = 0;
  int width = 1;
  int arity = 1;
  int ndata = 1;
  std::vector<double> input;       // dat1, read through the map
  std::vector<std::int32_t> map;   // map0, [end][arity]
};

RandomCase random_case(std::mt19937_64& rng);

/// Same, with the cell range and batch width fixed by the caller.
RandomCase random_case(std::mt19937_64& rng, std::int64_t start, std::int64_t end, int width);

/// Output buffers of one run, compared bitwise.
struct Outputs {
  std::vector<double> scattered;  // dat0
  std::vector<double> direct;     // dat2, [end][2]
  std::vector<double> visits;     // dat3, [end]
  bool operator==(const Outputs& o) const;
};

Outputs fresh_outputs(const RandomCase& c);

/// Interpret `kernel` with the case's inputs, accumulating into `out`.
void run(const crossvec::ir::LoopKernel& kernel, const RandomCase& c, Outputs& out, std::int64_t start,
         std::int64_t end);

/// Checks split_iname and the full batching pipeline against the plain
/// kernel: splitting and the batched main kernel must be bitwise identical
/// to the plain kernel over the same cells, and main plus remainder must
/// visit every cell of [start, end) exactly once with results identical to
/// the plain kernel run over the same ranges in the same order. Returns an
/// empty string on success, otherwise what went wrong.
std::string check_semantics(const RandomCase& c);

} // namespace testing_support
