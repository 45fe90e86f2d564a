#include "rtask/exec/session.hpp"

#include "rtask/errors.hpp"

namespace rtask::exec {

const char* session_status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::Running: return "RUNNING";
    case SessionStatus::PausedOnFault: return "PAUSED_ON_FAULT";
    case SessionStatus::Succeeded: return "SUCCEEDED";
    case SessionStatus::AbortedFinal: return "ABORTED_FINAL";
    case SessionStatus::Preempted: return "PREEMPTED";
  }
  return "?";
}

Value FaultContext::to_json() const {
  Value leaf_level;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    Value level = {{"unit", it->unit},
                   {"unit_kind", it->unit_kind},
                   {"step_index", it->step_index},
                   {"step_name", it->step_name},
                   {"params", it->params},
                   {"locals", it->locals}};
    if (leaf_level.is_null()) {
      level["error_signal"] = error_signal;
      level["error_fields"] = error_fields;
      level["consecutive_abort_count"] = consecutive_abort_count;
    } else {
      level["child"] = std::move(leaf_level);
    }
    leaf_level = std::move(level);
  }
  Value out = {{"chain", std::move(leaf_level)},
               {"beliefs", Value::object()},
               {"beliefs_at_counter", beliefs.at_counter}};
  for (const auto& [key, value] : beliefs.values) out["beliefs"][key] = value;
  return out;
}

std::vector<std::string> FaultContext::match_path() const {
  std::vector<std::string> path;
  for (const auto& level : chain)
    if (level.unit_kind == "task") path.push_back(level.unit);
  if (!chain.empty() && chain.back().unit_kind != "task") path.push_back(chain.back().unit);
  return path;
}

const char* resumption_strategy_name(ResumptionStrategy strategy) {
  switch (strategy) {
    case ResumptionStrategy::None: return "RESUME_NONE";
    case ResumptionStrategy::Continue: return "RESUME_CONTINUE";
    case ResumptionStrategy::Retry: return "RESUME_RETRY";
    case ResumptionStrategy::Next: return "RESUME_NEXT";
    case ResumptionStrategy::Previous: return "RESUME_PREVIOUS";
  }
  return "?";
}

ResumptionStrategy parse_resumption_strategy(const std::string& text) {
  if (text == "RESUME_NONE") return ResumptionStrategy::None;
  if (text == "RESUME_CONTINUE") return ResumptionStrategy::Continue;
  if (text == "RESUME_RETRY") return ResumptionStrategy::Retry;
  if (text == "RESUME_NEXT") return ResumptionStrategy::Next;
  if (text == "RESUME_PREVIOUS") return ResumptionStrategy::Previous;
  throw LoadError("STRUCTURE_ERROR", "'" + text + "' is not a resumption strategy");
}

}  // namespace rtask::exec
