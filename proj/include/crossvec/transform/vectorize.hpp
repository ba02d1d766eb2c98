#pragma once

#include "crossvec/ir/kernel.hpp"
#include "crossvec/transform/wrapper.hpp"

#include <set>
#include <string>

namespace crossvec::transform {

struct BatchPlan {
  int width = 4;
  std::string lane_iname = "n_simd";
  int alignment = 64;
};

/// Throws InvalidArgument unless width is 1, 2, 4, 8 or 16 and the alignment
/// is a power of two no smaller than a double.
void check_plan(const BatchPlan& plan);

/// Replace `iname` by `<iname>_outer` and a lane iname (default
/// `<iname>_simd`) running over factor * outer + lane. Non-divisible ranges
/// are preserved through coupled lane bounds.
ir::LoopKernel split_iname(const ir::LoopKernel& kernel, const std::string& iname, int factor,
                           std::string lane = {});

/// Narrow a split pair to the batches that are entirely inside the original
/// range, giving the lane a constant trip count of `factor`. The original
/// bounds must each be a single expression.
ir::LoopKernel restrict_to_full_batches(const ir::LoopKernel& kernel, const std::string& outer,
                                        const std::string& lane, int factor);

/// Increments to argument arrays whose address goes through a map read that
/// depends on the lane iname: two lanes may hit the same global entry.
std::set<std::string> detect_races(const ir::LoopKernel& kernel, const std::string& lane);

/// Tag the lane SIMD, move it innermost for every non-racing statement and
/// privatize every temporary written under it with a trailing unit-stride
/// lane axis.
ir::LoopKernel tag_simd(const ir::LoopKernel& kernel, const std::string& lane, const BatchPlan& plan);

struct VectorizedKernels {
  /// Full batches of `width` cells.
  ir::LoopKernel main;
  /// Plain wrapper over the cells in front of the first and after the last
  /// full batch.
  ir::LoopKernel remainder;
};

VectorizedKernels vectorize_pipeline(const ir::LoopKernel& local, const MapsSpec& maps, const BatchPlan& plan);

/// Same as vectorize_pipeline, starting from an existing wrapper.
VectorizedKernels vectorize_wrapper(const ir::LoopKernel& wrapper, const BatchPlan& plan);

} // namespace crossvec::transform
