#pragma once

#include "crossvec/ir/kernel.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace crossvec::ir {

/// One node of a loop-nest schedule: a loop over an iname, or a statement.
struct ScheduleNode {
  enum class Kind { loop, statement };

  Kind kind = Kind::statement;
  std::string iname;          // loop
  std::size_t statement = 0;  // index into LoopKernel::statements
  std::vector<ScheduleNode> body;

  bool is_loop() const noexcept { return kind == Kind::loop; }
};

/// Derive loop nests from statement `within` lists and dependencies.
///
/// Inside an open loop prefix the first ready statement (in list order)
/// whose prefix matches is scheduled next; a loop stays open while any ready
/// statement can still be placed inside it. Before a loop is opened, the
/// statements outside it that its contents still depend on are scheduled
/// first, so fusion does not hinge on which topological order the list uses.
/// Throws InvalidArgument when the dependencies can never be satisfied.
std::vector<ScheduleNode> build_schedule(const LoopKernel& kernel);

} // namespace crossvec::ir
