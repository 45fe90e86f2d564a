#include "rtask/monitor/supervisor.hpp"

#include <map>
#include <set>

#include "rtask/errors.hpp"
#include "rtask/monitor/diagnose.hpp"
#include "rtask/monitor/ledger.hpp"

namespace rtask::monitor {

const char* unseen_policy_name(UnseenPolicy policy) {
  return policy == UnseenPolicy::AlwaysExit ? "ALWAYS_EXIT" : "RETRY_ONCE_THEN_EXIT";
}

UnseenPolicy parse_unseen_policy(const std::string& text) {
  if (text == "ALWAYS_EXIT") return UnseenPolicy::AlwaysExit;
  if (text == "RETRY_ONCE_THEN_EXIT") return UnseenPolicy::RetryOnceThenExit;
  throw LoadError("STRUCTURE_ERROR", "'" + text + "' is not an unseen-fault policy");
}

namespace {

Value resolve_context_field(const exec::FaultContext& fault, const std::string& key) {
  const exec::FaultLevel& leaf = fault.leaf();
  if (key == "error_signal") return fault.error_signal;
  if (key == "unit") return leaf.unit;
  if (key == "step_name") return leaf.step_name;
  if (key.rfind("params.", 0) == 0) {
    std::string field = key.substr(7);
    if (leaf.params.contains(field)) return leaf.params[field];
    return nullptr;
  }
  if (key.rfind("error_fields.", 0) == 0) {
    std::string field = key.substr(13);
    if (fault.error_fields.contains(field)) return fault.error_fields[field];
    return nullptr;
  }
  return nullptr;
}

// Absent context fields and unknown database keys bind null so a recovery
// recipe can test them with exists() instead of faulting at invocation.
Value resolve_recovery_params(const std::vector<std::pair<std::string, RecoveryParam>>& params,
                              const exec::FaultContext& fault, const knowledge::Database& db) {
  Value out = Value::object();
  for (const auto& [name, source] : params) {
    switch (source.kind) {
      case RecoveryParam::Kind::Literal:
        out[name] = source.literal;
        break;
      case RecoveryParam::Kind::BeliefRef: {
        auto it = fault.beliefs.values.find(source.key);
        out[name] = it == fault.beliefs.values.end() ? Value(nullptr) : Value(it->second);
        break;
      }
      case RecoveryParam::Kind::ContextField:
        out[name] = resolve_context_field(fault, source.key);
        break;
      case RecoveryParam::Kind::DbRef:
        out[name] = db.has(source.key) ? db.get(source.key).to_value() : Value(nullptr);
        break;
    }
  }
  return out;
}

std::string unseen_key(const exec::FaultContext& fault) {
  std::string key;
  for (const auto& part : fault.match_path()) {
    key += part;
    key += '/';
  }
  key += '|';
  key += fault.error_signal;
  return key;
}

}  // namespace

exec::ExecutionSession run_supervised(const dsl::TaskLibrary& lib, const std::string& root,
                                      const Value& inputs, const RuleSet& rules,
                                      const dsl::TaskLibrary& recovery_lib,
                                      exec::ActionRegistry& registry,
                                      const knowledge::Database& db,
                                      knowledge::BeliefState& beliefs, exec::Trace& trace,
                                      const SupervisorConfig& config) {
  exec::Engine main_engine(lib, registry, db, beliefs, trace, "main");
  AbortLedger ledger;
  exec::ExecutionObserver observer;
  observer.on_leaf_result = [&](const std::vector<std::string>& path, const std::string& leaf,
                                exec::ActionStatus status) {
    if (status == exec::ActionStatus::Aborted) ledger.record_fault(path, leaf);
    if (status == exec::ActionStatus::Succeeded) ledger.record_leaf_success(path, leaf);
  };
  observer.on_task_success = [&](const std::string& unit) { ledger.record_task_success(unit); };
  main_engine.set_observer(std::move(observer));

  RuleMatchHistory history;
  std::map<std::string, RecoveryOutcome> last_outcome;
  std::set<std::string> unseen_retried;
  std::uint64_t rounds = 0;

  exec::ExecutionSession session = main_engine.execute(root, inputs);

  while (session.status == exec::SessionStatus::PausedOnFault) {
    const exec::FaultContext fault = *session.fault;
    std::vector<std::string> fault_path = fault.match_path();
    const std::string leaf = fault_path.empty() ? "" : fault_path.back();
    std::vector<std::string> task_path = fault_path;
    if (!task_path.empty()) task_path.pop_back();
    const std::string outcome_key = AbortLedger::leaf_key(task_path, leaf);

    ++rounds;
    std::optional<RecoveryOutcome> prior;
    if (auto it = last_outcome.find(outcome_key); it != last_outcome.end()) prior = it->second;
    RecoveryDecision decision =
        diagnose(rules, fault, fault.beliefs, ledger, prior, history, recovery_lib);

    trace.append("diagnosis", fault_path,
                 {{"session", session.id}, {"round", rounds},
                  {"error_signal", fault.error_signal},
                  {"consecutive_abort_count", fault.consecutive_abort_count},
                  {"leaf", leaf}, {"decision", decision.to_json()}});

    if (rounds > config.max_recovery_rounds) {
      trace.append("unseen_fault", fault_path,
                   {{"session", session.id}, {"reason", "recovery round cap reached"},
                    {"context", fault.to_json()}});
      main_engine.resume(session, {exec::ResumptionStrategy::None, ""});
      continue;
    }

    if (decision.unseen) {
      bool retry = config.unseen_policy == UnseenPolicy::RetryOnceThenExit &&
                   unseen_retried.insert(unseen_key(fault)).second;
      trace.append("unseen_fault", fault_path,
                   {{"session", session.id},
                    {"policy", unseen_policy_name(config.unseen_policy)},
                    {"handled", retry ? "retry_once" : "exit"},
                    {"context", fault.to_json()}});
      main_engine.resume(session, {retry ? exec::ResumptionStrategy::Continue
                                         : exec::ResumptionStrategy::None,
                                   ""});
      continue;
    }

    history[decision.rule_id].insert(leaf);

    exec::ResumptionDirective directive;
    if (decision.resumption) {
      directive.strategy = decision.resumption->strategy;
      directive.target_level = decision.resumption->target_level;
    }

    if (!decision.recovery_task.empty()) {
      Value recovery_inputs = resolve_recovery_params(decision.recovery_params, fault, db);
      std::string recovery_id = "recovery-" + std::to_string(rounds);
      trace.append("recovery_start", fault_path,
                   {{"session", recovery_id}, {"rule_id", decision.rule_id},
                    {"recovery_task", decision.recovery_task},
                    {"inputs", recovery_inputs}});
      exec::Engine recovery_engine(recovery_lib, registry, db, beliefs, trace, recovery_id);
      exec::ExecutionSession recovery_session =
          recovery_engine.execute(decision.recovery_task, recovery_inputs);
      RecoveryOutcome outcome = recovery_session.status == exec::SessionStatus::Succeeded
                                    ? RecoveryOutcome::RecoverySucceeded
                                    : RecoveryOutcome::RecoveryFailed;
      trace.append("recovery_result", fault_path,
                   {{"session", recovery_id}, {"rule_id", decision.rule_id},
                    {"outcome", recovery_outcome_name(outcome)},
                    {"outputs", recovery_session.outputs}});
      last_outcome[outcome_key] = outcome;
      if (decision.on_recovery_success) {
        const RuleResumption& branch = outcome == RecoveryOutcome::RecoverySucceeded
                                           ? *decision.on_recovery_success
                                           : *decision.on_recovery_failure;
        directive.strategy = branch.strategy;
        directive.target_level = branch.target_level;
      }
    }

    main_engine.resume(session, directive);
  }

  return session;
}

}  // namespace rtask::monitor
