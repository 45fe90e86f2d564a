// Consecutive-failure counters per leaf occurrence and per task name.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rtask::monitor {

class AbortLedger {
 public:
  // `path` is the unit-name chain excluding the leaf. Increments the
  // (path, leaf) counter and every task-name counter on the path.
  void record_fault(const std::vector<std::string>& path, const std::string& leaf);

  // A leaf success clears its (path, leaf) counter.
  void record_leaf_success(const std::vector<std::string>& path, const std::string& leaf);

  // A task's counter clears only when that task itself completes.
  void record_task_success(const std::string& task);

  std::uint64_t leaf_count(const std::vector<std::string>& path, const std::string& leaf) const;
  std::uint64_t task_count(const std::string& task) const;

  static std::string leaf_key(const std::vector<std::string>& path, const std::string& leaf);

 private:
  std::map<std::string, std::uint64_t> leaf_counts_;
  std::map<std::string, std::uint64_t> task_counts_;
};

}  // namespace rtask::monitor
