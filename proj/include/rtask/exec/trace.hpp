// Append-only trace log with a global event counter; serializes to
// line-delimited JSON that is byte-stable across seeded runs.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtask/value.hpp"

namespace rtask::exec {

struct TraceEvent {
  std::uint64_t step_counter = 0;
  std::string event;
  std::vector<std::string> path;
  Value payload;

  Value to_json() const;
  bool operator==(const TraceEvent& other) const = default;
};

class Trace {
 public:
  std::uint64_t append(std::string event, std::vector<std::string> path, Value payload);

  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  std::string to_jsonl() const;
  void write_jsonl_file(const std::string& path) const;

  // Throws LoadError SYNTAX_ERROR on a malformed line.
  static Trace from_jsonl(const std::string& text);

 private:
  std::vector<TraceEvent> events_;
  std::uint64_t next_counter_ = 1;
};

}  // namespace rtask::exec
