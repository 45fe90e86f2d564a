#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "rtask/exec/session.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/monitor/ledger.hpp"
#include "rtask/monitor/rules.hpp"

namespace rtask::monitor {

// Leaf names each rule has already matched, for the SHARED tag.
using RuleMatchHistory = std::map<std::string, std::set<std::string>>;

struct RecoveryDecision {
  bool unseen = false;
  std::string rule_id;  // empty when unseen
  std::string recovery_task;
  std::vector<std::pair<std::string, RecoveryParam>> recovery_params;
  std::optional<RuleResumption> resumption;  // fixed form
  std::optional<RuleResumption> on_recovery_success;
  std::optional<RuleResumption> on_recovery_failure;
  // SHARED: the rule matched a different leaf name earlier. IMMEDIATE: the
  // recovery recipe is a single action step. DYNAMIC: resumption depends on
  // the recovery outcome.
  std::set<std::string> tags;
  // Subset of TASK_LOCATION, NUM_ABORTS, BELIEF, ERROR_SIGNAL,
  // RECOVERY_RESULT: which match fields the winning rule populated.
  std::set<std::string> factors;

  Value to_json() const;
};

// First rule in document order whose every populated field matches; pure
// function of its arguments. `last_outcome` is the outcome of the previous
// recovery for this same leaf occurrence, if any.
RecoveryDecision diagnose(const RuleSet& rules, const exec::FaultContext& fault,
                          const knowledge::BeliefSnapshot& beliefs, const AbortLedger& ledger,
                          std::optional<RecoveryOutcome> last_outcome,
                          const RuleMatchHistory& history, const dsl::TaskLibrary& recovery_lib);

}  // namespace rtask::monitor
