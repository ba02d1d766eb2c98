#pragma once

#include <span>

namespace crossvec::fem::detail {

struct TrianglePoint {
  double x;
  double y;
  double weight;
};

inline constexpr int kMaxTriangleRuleDegree = 9;

/// Empty span when no rule of exactly this degree is tabulated.
std::span<const TrianglePoint> triangle_rule_table(int degree);

} // namespace crossvec::fem::detail
