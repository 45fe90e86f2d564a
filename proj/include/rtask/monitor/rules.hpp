// Declarative recovery rules: ordered, first-match-wins diagnosis over fault
// context, abort counters, and beliefs.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rtask/dsl/ast.hpp"
#include "rtask/exec/session.hpp"
#include "rtask/value.hpp"

namespace rtask::monitor {

struct BeliefPredicate {
  std::string key;
  bool less_than = true;  // true: value < threshold; false: value >= threshold
  double threshold = 0.5;

  bool operator==(const BeliefPredicate& other) const = default;
};

enum class RecoveryOutcome { RecoverySucceeded, RecoveryFailed };

const char* recovery_outcome_name(RecoveryOutcome outcome);

// Where a recovery task's param values come from when the rule fires.
struct RecoveryParam {
  enum class Kind { Literal, BeliefRef, ContextField, DbRef };
  Kind kind = Kind::Literal;
  Value literal;
  // BeliefRef: belief key. DbRef: database key. ContextField: dotted path
  // under the fault leaf, e.g. "error_signal", "params.waypoint",
  // "error_fields.attempt".
  std::string key;

  bool operator==(const RecoveryParam& other) const = default;
};

struct RuleResumption {
  exec::ResumptionStrategy strategy = exec::ResumptionStrategy::None;
  std::string target_level;  // empty: the failing frame

  bool operator==(const RuleResumption& other) const = default;
};

struct RecoveryRule {
  std::string id;
  // Matches a suffix of the fault's unit-name chain, either with or without
  // the leaf name as final element; empty matches anything.
  std::vector<std::string> task_path_suffix;
  std::optional<std::string> action_name;
  std::optional<std::string> error_signal_pattern;  // glob (* and ?)
  std::uint64_t min_consecutive_aborts = 1;
  std::optional<std::uint64_t> max_consecutive_aborts;
  std::vector<BeliefPredicate> belief_predicates;
  std::optional<RecoveryOutcome> required_prior_outcome;

  std::string recovery_task;  // empty: diagnose-only, no recovery recipe
  std::vector<std::pair<std::string, RecoveryParam>> recovery_params;

  // Exactly one form: fixed, or the success/failure pair (dynamic).
  std::optional<RuleResumption> resumption;
  std::optional<RuleResumption> on_recovery_success;
  std::optional<RuleResumption> on_recovery_failure;

  bool explicit_abort_bounds = false;  // min/max appeared in the document
  bool dynamic() const { return on_recovery_success.has_value(); }
};

struct RuleSet {
  std::vector<RecoveryRule> rules;  // document order = priority order
};

// Glob match with * and ? over the whole string.
bool glob_match(const std::string& pattern, const std::string& text);

// Throws LoadError: UNKNOWN_RECOVERY_TASK, UNKNOWN_BELIEF_KEY, BAD_RANGE
// (min > max), STRUCTURE_ERROR for malformed rules (e.g. both resumption
// forms, or a dynamic pair without a recovery task).
RuleSet load_rules(const std::string& text, const dsl::TaskLibrary& recovery_lib,
                   const std::set<std::string>& belief_keys);
RuleSet load_rules_file(const std::string& path, const dsl::TaskLibrary& recovery_lib,
                        const std::set<std::string>& belief_keys);

// Inverse of load_rules, used to write edited rule sets back to disk.
std::string serialize_rules(const RuleSet& rules);

}  // namespace rtask::monitor
