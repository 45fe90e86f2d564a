// Recovery-usage statistics from a trace: property, diagnosis-factor, and
// resumption-strategy breakdowns.
#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rtask/exec/trace.hpp"
#include "rtask/value.hpp"

namespace rtask::monitor {

struct Breakdown {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t denominator = 0;
  std::map<std::string, double> percentages;  // empty when denominator is 0
};

struct StatsReport {
  std::uint64_t recovery_events = 0;
  // Each recovery event lands in exactly one bucket per breakdown; events
  // outside the named categories land in OTHER.
  Breakdown properties;  // SHARED, IMMEDIATE, DYNAMIC
  Breakdown factors;     // TASK_LOCATION, NUM_ABORTS, BELIEF, ERROR_SIGNAL, RECOVERY_RESULT
  Breakdown strategies;  // the five RESUME_* strategies

  Value to_json() const;
  std::string to_text() const;
};

StatsReport report(const exec::Trace& trace);

}  // namespace rtask::monitor
