#include "rtask/monitor/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace rtask::monitor {

namespace {

constexpr std::array<const char*, 3> kProperties = {"SHARED", "IMMEDIATE", "DYNAMIC"};
constexpr std::array<const char*, 5> kFactors = {"TASK_LOCATION", "NUM_ABORTS", "BELIEF",
                                                 "ERROR_SIGNAL", "RECOVERY_RESULT"};
constexpr std::array<const char*, 5> kStrategies = {"RESUME_NONE", "RESUME_CONTINUE",
                                                    "RESUME_RETRY", "RESUME_NEXT",
                                                    "RESUME_PREVIOUS"};

bool has_entry(const Value& arr, const char* name) {
  for (const auto& item : arr)
    if (item == name) return true;
  return false;
}

// Precedence picks the most specific bucket when an event carries several.
std::string property_bucket(const Value& decision) {
  if (decision.value("unseen", false) || !decision.contains("tags")) return "OTHER";
  const Value& tags = decision["tags"];
  if (has_entry(tags, "DYNAMIC")) return "DYNAMIC";
  if (has_entry(tags, "SHARED")) return "SHARED";
  if (has_entry(tags, "IMMEDIATE")) return "IMMEDIATE";
  return "OTHER";
}

std::string factor_bucket(const Value& decision) {
  if (decision.value("unseen", false) || !decision.contains("factors")) return "OTHER";
  const Value& factors = decision["factors"];
  if (has_entry(factors, "RECOVERY_RESULT")) return "RECOVERY_RESULT";
  if (has_entry(factors, "BELIEF")) return "BELIEF";
  if (has_entry(factors, "NUM_ABORTS")) return "NUM_ABORTS";
  if (has_entry(factors, "ERROR_SIGNAL")) return "ERROR_SIGNAL";
  if (has_entry(factors, "TASK_LOCATION")) return "TASK_LOCATION";
  return "OTHER";
}

void finish(Breakdown& b) {
  b.denominator = 0;
  for (const auto& [bucket, count] : b.counts) {
    (void)bucket;
    b.denominator += count;
  }
  if (b.denominator == 0) return;
  for (const auto& [bucket, count] : b.counts)
    b.percentages[bucket] = 100.0 * static_cast<double>(count) /
                            static_cast<double>(b.denominator);
}

Value breakdown_json(const Breakdown& b) {
  Value out = {{"denominator", b.denominator}, {"counts", Value::object()},
               {"percentages", Value::object()}};
  for (const auto& [bucket, count] : b.counts) out["counts"][bucket] = count;
  for (const auto& [bucket, pct] : b.percentages) out["percentages"][bucket] = pct;
  return out;
}

void breakdown_text(std::string& out, const char* title, const Breakdown& b) {
  out += title;
  out += ":\n";
  if (b.denominator == 0) {
    out += "  (no recovery events)\n";
    return;
  }
  std::size_t width = 0;
  for (const auto& [bucket, count] : b.counts) {
    (void)count;
    width = std::max(width, bucket.size());
  }
  for (const auto& [bucket, count] : b.counts) {
    char line[128];
    std::snprintf(line, sizeof line, "  %-*s %6llu  %6.1f%%\n", static_cast<int>(width),
                  bucket.c_str(), static_cast<unsigned long long>(count),
                  b.percentages.count(bucket) ? b.percentages.at(bucket) : 0.0);
    out += line;
  }
}

}  // namespace

Value StatsReport::to_json() const {
  return {{"recovery_events", recovery_events},
          {"properties", breakdown_json(properties)},
          {"factors", breakdown_json(factors)},
          {"strategies", breakdown_json(strategies)}};
}

std::string StatsReport::to_text() const {
  std::string out = "recovery events: " + std::to_string(recovery_events) + "\n";
  breakdown_text(out, "recovery properties", properties);
  breakdown_text(out, "diagnosis factors", factors);
  breakdown_text(out, "resumption strategies", strategies);
  return out;
}

StatsReport report(const exec::Trace& trace) {
  StatsReport stats;
  for (const char* name : kProperties) stats.properties.counts[name] = 0;
  for (const char* name : kFactors) stats.factors.counts[name] = 0;
  for (const char* name : kStrategies) stats.strategies.counts[name] = 0;

  for (const auto& event : trace.events()) {
    if (event.event == "diagnosis") {
      if (!event.payload.contains("decision")) continue;
      const Value& decision = event.payload["decision"];
      ++stats.recovery_events;
      ++stats.properties.counts[property_bucket(decision)];
      ++stats.factors.counts[factor_bucket(decision)];
    } else if (event.event == "resumption") {
      ++stats.strategies.counts[event.payload.value("strategy", std::string("RESUME_NONE"))];
    }
  }

  finish(stats.properties);
  finish(stats.factors);
  finish(stats.strategies);
  return stats;
}

}  // namespace rtask::monitor
