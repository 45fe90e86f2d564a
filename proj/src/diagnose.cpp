#include "rtask/monitor/diagnose.hpp"

#include <algorithm>

namespace rtask::monitor {

namespace {

bool is_suffix(const std::vector<std::string>& suffix, const std::vector<std::string>& seq) {
  if (suffix.size() > seq.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), seq.rbegin());
}

Value resumption_json(const RuleResumption& r) {
  return {{"strategy", exec::resumption_strategy_name(r.strategy)},
          {"target_level", r.target_level}};
}

Value param_source_json(const RecoveryParam& p) {
  switch (p.kind) {
    case RecoveryParam::Kind::Literal: return {{"from", "literal"}, {"value", p.literal}};
    case RecoveryParam::Kind::BeliefRef: return {{"from", "belief"}, {"key", p.key}};
    case RecoveryParam::Kind::ContextField: return {{"from", "context"}, {"key", p.key}};
    case RecoveryParam::Kind::DbRef: return {{"from", "db"}, {"key", p.key}};
  }
  return Value::object();
}

}  // namespace

Value RecoveryDecision::to_json() const {
  Value out = {{"unseen", unseen}, {"rule_id", rule_id}, {"recovery_task", recovery_task}};
  out["tags"] = Value::array();
  for (const auto& tag : tags) out["tags"].push_back(tag);
  out["factors"] = Value::array();
  for (const auto& factor : factors) out["factors"].push_back(factor);
  if (resumption) out["resumption"] = resumption_json(*resumption);
  if (on_recovery_success) out["on_recovery_success"] = resumption_json(*on_recovery_success);
  if (on_recovery_failure) out["on_recovery_failure"] = resumption_json(*on_recovery_failure);
  if (!recovery_params.empty()) {
    out["recovery_params"] = Value::object();
    for (const auto& [name, source] : recovery_params)
      out["recovery_params"][name] = param_source_json(source);
  }
  return out;
}

RecoveryDecision diagnose(const RuleSet& rules, const exec::FaultContext& fault,
                          const knowledge::BeliefSnapshot& beliefs, const AbortLedger& ledger,
                          std::optional<RecoveryOutcome> last_outcome,
                          const RuleMatchHistory& history, const dsl::TaskLibrary& recovery_lib) {
  std::vector<std::string> full_path = fault.match_path();
  std::vector<std::string> task_path = full_path;
  if (!task_path.empty()) task_path.pop_back();
  const std::string leaf = full_path.empty() ? "" : full_path.back();

  for (const auto& rule : rules.rules) {
    bool ends_at_leaf = true;
    if (!rule.task_path_suffix.empty()) {
      if (is_suffix(rule.task_path_suffix, full_path)) {
        ends_at_leaf = rule.task_path_suffix.back() == leaf;
      } else if (is_suffix(rule.task_path_suffix, task_path)) {
        ends_at_leaf = false;
      } else {
        continue;
      }
    }
    if (rule.action_name && *rule.action_name != leaf) continue;
    if (rule.error_signal_pattern &&
        !glob_match(*rule.error_signal_pattern, fault.error_signal))
      continue;

    // Suffixes ending at a task gate on that task's hierarchical counter;
    // everything else gates on the failing leaf's counter.
    std::uint64_t count = ends_at_leaf ? fault.consecutive_abort_count
                                       : ledger.task_count(rule.task_path_suffix.back());
    if (count < rule.min_consecutive_aborts) continue;
    if (rule.max_consecutive_aborts && count > *rule.max_consecutive_aborts) continue;

    bool beliefs_ok = true;
    for (const auto& pred : rule.belief_predicates) {
      auto it = beliefs.values.find(pred.key);
      if (it == beliefs.values.end() ||
          (pred.less_than ? !(it->second < pred.threshold) : !(it->second >= pred.threshold))) {
        beliefs_ok = false;
        break;
      }
    }
    if (!beliefs_ok) continue;

    if (rule.required_prior_outcome &&
        (!last_outcome || *last_outcome != *rule.required_prior_outcome))
      continue;

    RecoveryDecision decision;
    decision.rule_id = rule.id;
    decision.recovery_task = rule.recovery_task;
    decision.recovery_params = rule.recovery_params;
    decision.resumption = rule.resumption;
    decision.on_recovery_success = rule.on_recovery_success;
    decision.on_recovery_failure = rule.on_recovery_failure;

    if (rule.dynamic()) decision.tags.insert("DYNAMIC");
    auto seen = history.find(rule.id);
    if (seen != history.end() &&
        std::any_of(seen->second.begin(), seen->second.end(),
                    [&](const std::string& name) { return name != leaf; }))
      decision.tags.insert("SHARED");
    if (!rule.recovery_task.empty()) {
      const dsl::TaskDefinition* def = recovery_lib.find(rule.recovery_task);
      if (def && def->steps.size() == 1 && def->steps[0].kind == dsl::StepKind::Action)
        decision.tags.insert("IMMEDIATE");
    }

    if (!rule.task_path_suffix.empty() || rule.action_name)
      decision.factors.insert("TASK_LOCATION");
    if (rule.explicit_abort_bounds) decision.factors.insert("NUM_ABORTS");
    if (!rule.belief_predicates.empty()) decision.factors.insert("BELIEF");
    if (rule.error_signal_pattern) decision.factors.insert("ERROR_SIGNAL");
    if (rule.required_prior_outcome || rule.dynamic())
      decision.factors.insert("RECOVERY_RESULT");
    return decision;
  }

  RecoveryDecision unseen;
  unseen.unseen = true;
  return unseen;
}

}  // namespace rtask::monitor
