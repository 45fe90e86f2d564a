// Action and op registry: the consistent call interface leaf steps go
// through, plus the built-in op catalog.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rtask/dsl/validate.hpp"
#include "rtask/value.hpp"

namespace rtask::knowledge {
class BeliefState;
class Database;
}  // namespace rtask::knowledge

namespace rtask::exec {

enum class ActionStatus { Succeeded, Aborted, Preempted };

const char* action_status_name(ActionStatus status);

struct ActionResult {
  ActionStatus status = ActionStatus::Succeeded;
  Value outputs = Value::object();       // SUCCEEDED only
  std::string error_signal;              // ABORTED only, non-empty
  Value error_fields = Value::object();  // ABORTED only

  static ActionResult success(Value outputs = Value::object());
  static ActionResult abort(std::string signal, Value fields = Value::object());
  static ActionResult preempted();
};

class CancellationToken {
 public:
  CancellationToken() : flag_(std::make_shared<std::atomic<bool>>(false)) {}
  void request() { flag_->store(true); }
  bool requested() const { return flag_->load(); }

 private:
  std::shared_ptr<std::atomic<bool>> flag_;
};

// Per-invocation context handed to handlers. `ordinal` counts invocations of
// this handler through this registry (1-based), shared across the main and
// recovery executors so fault plans see one global invocation history.
struct ActionRuntime {
  std::uint64_t ordinal = 1;
  CancellationToken cancel;
  knowledge::BeliefState* beliefs = nullptr;
  const knowledge::Database* db = nullptr;
};

struct ActionHandler {
  std::string name;
  dsl::UnitSignature signature;
  std::function<ActionResult(const Value& params, ActionRuntime&)> execute;
};

using OpFn = std::function<std::vector<Value>(const std::vector<Value>&)>;

struct OpHandler {
  std::string name;
  std::size_t min_args = 0;
  std::size_t max_args = SIZE_MAX;
  std::size_t num_outputs = 0;
  OpFn transform;
};

class ActionRegistry {
 public:
  ActionRegistry() = default;
  ActionRegistry(const ActionRegistry&) = delete;
  ActionRegistry& operator=(const ActionRegistry&) = delete;

  // Both throw LoadError DUPLICATE_NAME on reuse across actions and ops.
  void register_action(ActionHandler handler);
  void register_op(OpHandler handler);

  bool has_action(const std::string& name) const;
  bool has_op(const std::string& name) const;
  const ActionHandler* find_action(const std::string& name) const;
  const OpHandler* find_op(const std::string& name) const;

  // Runs a handler, stamping the next invocation ordinal into the runtime.
  ActionResult invoke_action(const std::string& name, const Value& params, ActionRuntime& rt);
  // Op failures (arity, bad operand kinds, transform throwing) come back as
  // ABORTED with error_signal OP_FAILURE.
  ActionResult invoke_op(const std::string& name, const std::vector<Value>& args);

  std::uint64_t invocations(const std::string& name) const;

  // Signature table for recipe validation.
  void fill_validation_context(dsl::ValidationContext& ctx) const;

 private:
  std::map<std::string, ActionHandler> actions_;
  std::map<std::string, OpHandler> ops_;
  std::map<std::string, std::uint64_t> counts_;
};

// Registers noop, get_index, increment, decrement, make_list, negate, assign.
void register_builtin_ops(ActionRegistry& registry);

}  // namespace rtask::exec
