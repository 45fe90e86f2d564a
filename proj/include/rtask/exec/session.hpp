// Execution sessions: interpreter call stack, fault contexts, resumption
// directives.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rtask/dsl/ast.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/value.hpp"

namespace rtask::exec {

enum class SessionStatus { Running, PausedOnFault, Succeeded, AbortedFinal, Preempted };

const char* session_status_name(SessionStatus status);

enum class FrameKind { Task, Branch, LoopBody };

// One level of the interpreter stack. Task frames own locals; Branch and
// LoopBody frames are synthetic scopes that read/write the nearest enclosing
// Task frame's locals.
struct Frame {
  FrameKind kind = FrameKind::Task;
  std::string name;  // step name; "<step>.branch" when synthetic
  std::string unit;  // task definition name (Task frames only)
  const std::vector<dsl::Step>* steps = nullptr;
  std::size_t step_index = 0;
  Value params = Value::object();
  Value original_params = Value::object();
  std::map<std::string, Value> locals;
  std::vector<std::string> capture_vars;  // invoking step's var list
  std::uint64_t loop_iteration = 0;       // LoopBody frames, 1-based
  const dsl::Step* owner_step = nullptr;  // synthetic frames: the choice/loop step
};

struct FaultLevel {
  std::string unit;       // task name, branch name, or failing leaf name
  std::string unit_kind;  // task | branch | loop | action | op | internal
  std::size_t step_index = 0;
  std::string step_name;
  Value params = Value::object();
  Value locals = Value::object();

  bool operator==(const FaultLevel& other) const = default;
};

// Recursive fault metadata: one level per stack frame, outermost first, plus
// the failing leaf as the last level.
struct FaultContext {
  std::vector<FaultLevel> chain;
  std::string error_signal;
  Value error_fields = Value::object();
  std::uint64_t consecutive_abort_count = 0;
  knowledge::BeliefSnapshot beliefs;

  // Nested-dictionary rendering: each level holds its child under "child";
  // the leaf level carries error_signal/error_fields/consecutive_abort_count.
  Value to_json() const;

  // Unit-name chain of the task levels plus the leaf name, synthetic frames
  // skipped; what recovery rules match against.
  std::vector<std::string> match_path() const;
  const FaultLevel& leaf() const { return chain.back(); }

  bool operator==(const FaultContext& other) const = default;
};

enum class ResumptionStrategy { None, Continue, Retry, Next, Previous };

const char* resumption_strategy_name(ResumptionStrategy strategy);
// Parses RESUME_NONE .. RESUME_PREVIOUS; throws LoadError STRUCTURE_ERROR.
ResumptionStrategy parse_resumption_strategy(const std::string& text);

struct ResumptionDirective {
  ResumptionStrategy strategy = ResumptionStrategy::None;
  // Task name (or invoking step name) of the frame to unwind to; empty means
  // the innermost task frame.
  std::string target_level;
};

struct ExecutionSession {
  std::string id;
  std::string root;
  SessionStatus status = SessionStatus::Running;
  std::vector<Frame> stack;
  std::optional<FaultContext> fault;
  Value outputs = Value::object();
  std::map<std::string, std::uint64_t> ordinals;  // per-unit invocation counts
};

}  // namespace rtask::exec
