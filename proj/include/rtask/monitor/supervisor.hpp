// Supervision loop: execute, diagnose on fault, run recovery recipes on a
// second executor, resume per directive.
#pragma once

#include <cstdint>
#include <string>

#include "rtask/dsl/ast.hpp"
#include "rtask/exec/action.hpp"
#include "rtask/exec/engine.hpp"
#include "rtask/exec/session.hpp"
#include "rtask/exec/trace.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/knowledge/database.hpp"
#include "rtask/monitor/rules.hpp"
#include "rtask/value.hpp"

namespace rtask::monitor {

enum class UnseenPolicy { AlwaysExit, RetryOnceThenExit };

const char* unseen_policy_name(UnseenPolicy policy);
UnseenPolicy parse_unseen_policy(const std::string& text);

struct SupervisorConfig {
  UnseenPolicy unseen_policy = UnseenPolicy::AlwaysExit;
  // Hard cap on recovery rounds per run; exceeding it abandons the session
  // (ABORTED_FINAL) so a retry loop cannot spin forever.
  std::uint64_t max_recovery_rounds = 200;
};

// Executes `root` under rule-driven recovery. Both libraries must be
// validated; the registry is shared between the main and recovery executors
// so action invocation ordinals form one history. Appends every diagnosis,
// recovery run, and resumption to `trace` and finishes with a session_end
// event.
exec::ExecutionSession run_supervised(const dsl::TaskLibrary& lib, const std::string& root,
                                      const Value& inputs, const RuleSet& rules,
                                      const dsl::TaskLibrary& recovery_lib,
                                      exec::ActionRegistry& registry,
                                      const knowledge::Database& db,
                                      knowledge::BeliefState& beliefs, exec::Trace& trace,
                                      const SupervisorConfig& config);

}  // namespace rtask::monitor
