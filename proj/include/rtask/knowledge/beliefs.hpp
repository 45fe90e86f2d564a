// Belief store: scalar confidences in [0,1] under a closed per-scenario
// schema, with a monotone update counter.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>

namespace rtask::knowledge {

struct BeliefSnapshot {
  std::map<std::string, double> values;
  std::uint64_t at_counter = 0;

  bool operator==(const BeliefSnapshot& other) const = default;
};

class BeliefState {
 public:
  BeliefState() = default;

  // Declares the schema. Once any key is declared, setting an undeclared
  // key throws LoadError UNKNOWN_BELIEF_KEY.
  void declare(const std::string& key, double initial);

  // Throws LoadError RANGE_ERROR outside [0,1]. Each set bumps the update
  // counter; the on_update hook (if any) observes (key, value, counter).
  void set(const std::string& key, double value);

  double get(const std::string& key) const;
  bool has(const std::string& key) const;
  std::set<std::string> keys() const;

  BeliefSnapshot snapshot() const;
  std::uint64_t update_counter() const { return counter_; }
  std::uint64_t last_updated(const std::string& key) const;

  std::function<void(const std::string&, double, std::uint64_t)> on_update;

 private:
  struct Entry {
    double value = 0.0;
    std::uint64_t updated_at = 0;
  };
  std::map<std::string, Entry> beliefs_;
  std::uint64_t counter_ = 0;
  bool closed_ = false;
};

// Schema file: map of belief key -> initial value in [0,1].
BeliefState load_belief_schema(const std::string& text);
BeliefState load_belief_schema_file(const std::string& path);

}  // namespace rtask::knowledge
