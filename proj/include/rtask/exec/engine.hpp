// Recipe interpreter: explicit-stack execution with pause-on-fault and
// level-addressed resumption.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rtask/dsl/ast.hpp"
#include "rtask/exec/action.hpp"
#include "rtask/exec/expr.hpp"
#include "rtask/exec/session.hpp"
#include "rtask/exec/trace.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/knowledge/database.hpp"
#include "rtask/value.hpp"

namespace rtask::exec {

// Hooks the monitor uses to keep its abort ledger in step with execution.
struct ExecutionObserver {
  // path excludes the leaf; leaf is the action/op name.
  std::function<void(const std::vector<std::string>& path, const std::string& leaf,
                     ActionStatus status)>
      on_leaf_result;
  // Fires when a task frame completes successfully.
  std::function<void(const std::string& unit)> on_task_success;
};

class Engine {
 public:
  // The library must be validated. All references are borrowed and must
  // outlive the engine.
  Engine(const dsl::TaskLibrary& lib, ActionRegistry& registry, const knowledge::Database& db,
         knowledge::BeliefState& beliefs, Trace& trace, std::string session_id = "main");

  // Runs until the session is terminal or pauses on its first fault.
  // `inputs` must bind exactly the root task's declared params.
  ExecutionSession execute(const std::string& root, const Value& inputs);

  // Unwinds to the directive's target frame, applies the strategy, and runs
  // on. Throws LoadError INVALID_STATE unless paused, INVALID_TARGET when the
  // target names no frame on the stack.
  void resume(ExecutionSession& session, const ResumptionDirective& directive);

  void set_observer(ExecutionObserver observer) { observer_ = std::move(observer); }
  CancellationToken& cancel_token() { return cancel_; }

 private:
  void run(ExecutionSession& session);
  void dispatch_step(ExecutionSession& session, const dsl::Step& step);
  void complete_frame(ExecutionSession& session);
  // step == nullptr marks a frame-completion fault (missing outputs).
  void raise_fault(ExecutionSession& session, const dsl::Step* step, const std::string& unit_kind,
                   const std::string& signal, Value error_fields, const Value& leaf_params);
  Scope scope_for(ExecutionSession& session);
  Frame& locals_frame(ExecutionSession& session);
  std::vector<std::string> current_path(const ExecutionSession& session) const;

  const dsl::TaskLibrary& lib_;
  ActionRegistry& registry_;
  const knowledge::Database& db_;
  knowledge::BeliefState& beliefs_;
  Trace& trace_;
  std::string session_id_;
  ExecutionObserver observer_;
  CancellationToken cancel_;
  // Consecutive aborts per (path + leaf), cleared when that leaf succeeds;
  // feeds FaultContext.consecutive_abort_count.
  std::map<std::string, std::uint64_t> consecutive_aborts_;
};

// Runs one action or task behind a JSON boundary. Input document: an object
// binding the unit's params. Returns {"status": ..., "outputs": ...} with
// "fault_context" attached when the run faulted; the run is not resumable.
// Throws LoadError DESERIALIZATION_ERROR for malformed input, UNKNOWN_UNIT
// for an unresolvable name.
std::string execute_unit_isolated(const dsl::TaskLibrary& lib, ActionRegistry& registry,
                                  const knowledge::Database& db, knowledge::BeliefState& beliefs,
                                  Trace& trace, const std::string& unit,
                                  const std::string& input_json);

}  // namespace rtask::exec
