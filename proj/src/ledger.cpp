#include "rtask/monitor/ledger.hpp"

namespace rtask::monitor {

std::string AbortLedger::leaf_key(const std::vector<std::string>& path,
                                  const std::string& leaf) {
  std::string key;
  for (const auto& part : path) {
    key += part;
    key += '/';
  }
  key += '|';
  key += leaf;
  return key;
}

void AbortLedger::record_fault(const std::vector<std::string>& path, const std::string& leaf) {
  ++leaf_counts_[leaf_key(path, leaf)];
  for (const auto& task : path) ++task_counts_[task];
}

void AbortLedger::record_leaf_success(const std::vector<std::string>& path,
                                      const std::string& leaf) {
  leaf_counts_.erase(leaf_key(path, leaf));
}

void AbortLedger::record_task_success(const std::string& task) { task_counts_.erase(task); }

std::uint64_t AbortLedger::leaf_count(const std::vector<std::string>& path,
                                      const std::string& leaf) const {
  auto it = leaf_counts_.find(leaf_key(path, leaf));
  return it == leaf_counts_.end() ? 0 : it->second;
}

std::uint64_t AbortLedger::task_count(const std::string& task) const {
  auto it = task_counts_.find(task);
  return it == task_counts_.end() ? 0 : it->second;
}

}  // namespace rtask::monitor
