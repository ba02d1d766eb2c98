#include "crossvec/ir/schedule.hpp"

#include "crossvec/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace crossvec::ir {

namespace {

class Scheduler {
public:
  explicit Scheduler(const LoopKernel& kernel) : kernel_(kernel), done_(kernel.statements.size(), false)
  {
    for (std::size_t i = 0; i < kernel.statements.size(); ++i) {
      index_[kernel.statements[i].id] = i;
    }
  }

  std::vector<ScheduleNode> run()
  {
    std::vector<std::string> prefix;
    auto nodes = schedule(prefix);
    for (std::size_t i = 0; i < done_.size(); ++i) {
      if (!done_[i]) {
        throw InvalidArgument("kernel '" + kernel_.name + "': statement '" + kernel_.statements[i].id +
                              "' can never be scheduled (unsatisfiable dependencies)");
      }
    }
    return nodes;
  }

private:
  bool ready(std::size_t i) const
  {
    for (const auto& dep : kernel_.statements[i].depends_on) {
      auto it = index_.find(dep);
      if (it == index_.end()) {
        throw InvalidArgument("statement '" + kernel_.statements[i].id + "' depends on unknown statement '" +
                              dep + "'");
      }
      if (!done_[it->second]) {
        return false;
      }
    }
    return true;
  }

  static bool has_prefix(const std::vector<std::string>& within, const std::vector<std::string>& prefix)
  {
    return within.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), within.begin());
  }

  std::vector<ScheduleNode> schedule(std::vector<std::string>& prefix)
  {
    std::vector<ScheduleNode> out;
    for (;;) {
      std::size_t pick = done_.size();
      for (std::size_t i = 0; i < done_.size(); ++i) {
        if (!done_[i] && has_prefix(kernel_.statements[i].within, prefix) && ready(i)) {
          pick = i;
          break;
        }
      }
      if (pick == done_.size()) {
        return out;
      }
      pick = defer_loop_entry(pick, prefix);
      const auto& within = kernel_.statements[pick].within;
      if (within.size() == prefix.size()) {
        done_[pick] = true;
        ScheduleNode node;
        node.kind = ScheduleNode::Kind::statement;
        node.statement = pick;
        out.push_back(std::move(node));
        continue;
      }
      ScheduleNode loop;
      loop.kind = ScheduleNode::Kind::loop;
      loop.iname = within[prefix.size()];
      prefix.push_back(loop.iname);
      loop.body = schedule(prefix);
      prefix.pop_back();
      out.push_back(std::move(loop));
    }
  }

  /// Before opening the loop that `pick` needs, run whatever outside that
  /// loop its statements still wait for. Otherwise a statement reading a
  /// per-iteration temporary could land in a second instance of the loop,
  /// after the values it needs were overwritten. Each loop is deferred at
  /// most once per decision, so two loops cannot defer to each other forever.
  std::size_t defer_loop_entry(std::size_t pick, const std::vector<std::string>& prefix)
  {
    std::set<std::string> tried;
    for (;;) {
      const auto& within = kernel_.statements[pick].within;
      if (within.size() == prefix.size() || !tried.insert(within[prefix.size()]).second) {
        return pick;
      }
      std::vector<std::string> inner = prefix;
      inner.push_back(within[prefix.size()]);
      std::vector<bool> needed(done_.size(), false);
      std::vector<std::size_t> stack;
      for (std::size_t i = 0; i < done_.size(); ++i) {
        if (!done_[i] && has_prefix(kernel_.statements[i].within, inner)) {
          stack.push_back(i);
        }
      }
      while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (const auto& dep : kernel_.statements[i].depends_on) {
          std::size_t d = index_.at(dep);
          if (!done_[d] && !needed[d] && !has_prefix(kernel_.statements[d].within, inner)) {
            needed[d] = true;
            stack.push_back(d);
          }
        }
      }
      std::size_t next = done_.size();
      for (std::size_t i = 0; i < done_.size(); ++i) {
        if (needed[i] && has_prefix(kernel_.statements[i].within, prefix) && ready(i)) {
          next = i;
          break;
        }
      }
      if (next == done_.size()) {
        return pick;
      }
      pick = next;
    }
  }

  const LoopKernel& kernel_;
  std::vector<bool> done_;
  std::map<std::string, std::size_t> index_;
};

} // namespace

std::vector<ScheduleNode> build_schedule(const LoopKernel& kernel)
{
  return Scheduler(kernel).run();
}

} // namespace crossvec::ir
