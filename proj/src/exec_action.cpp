#include "rtask/exec/action.hpp"

#include <stdexcept>

#include "rtask/errors.hpp"

namespace rtask::exec {

const char* action_status_name(ActionStatus status) {
  switch (status) {
    case ActionStatus::Succeeded: return "SUCCEEDED";
    case ActionStatus::Aborted: return "ABORTED";
    case ActionStatus::Preempted: return "PREEMPTED";
  }
  return "?";
}

ActionResult ActionResult::success(Value outputs) {
  ActionResult r;
  r.status = ActionStatus::Succeeded;
  r.outputs = std::move(outputs);
  return r;
}

ActionResult ActionResult::abort(std::string signal, Value fields) {
  ActionResult r;
  r.status = ActionStatus::Aborted;
  r.error_signal = std::move(signal);
  r.error_fields = std::move(fields);
  return r;
}

ActionResult ActionResult::preempted() {
  ActionResult r;
  r.status = ActionStatus::Preempted;
  return r;
}

void ActionRegistry::register_action(ActionHandler handler) {
  if (actions_.count(handler.name) || ops_.count(handler.name))
    throw LoadError("DUPLICATE_NAME", "'" + handler.name + "' is already registered");
  std::string name = handler.name;
  actions_.emplace(std::move(name), std::move(handler));
}

void ActionRegistry::register_op(OpHandler handler) {
  if (actions_.count(handler.name) || ops_.count(handler.name))
    throw LoadError("DUPLICATE_NAME", "'" + handler.name + "' is already registered");
  std::string name = handler.name;
  ops_.emplace(std::move(name), std::move(handler));
}

bool ActionRegistry::has_action(const std::string& name) const { return actions_.count(name); }
bool ActionRegistry::has_op(const std::string& name) const { return ops_.count(name); }

const ActionHandler* ActionRegistry::find_action(const std::string& name) const {
  auto it = actions_.find(name);
  return it == actions_.end() ? nullptr : &it->second;
}

const OpHandler* ActionRegistry::find_op(const std::string& name) const {
  auto it = ops_.find(name);
  return it == ops_.end() ? nullptr : &it->second;
}

ActionResult ActionRegistry::invoke_action(const std::string& name, const Value& params,
                                           ActionRuntime& rt) {
  const ActionHandler* handler = find_action(name);
  if (!handler) throw LoadError("UNKNOWN_TARGET", "no action named '" + name + "'");
  rt.ordinal = ++counts_[name];
  if (rt.cancel.requested()) return ActionResult::preempted();
  return handler->execute(params, rt);
}

ActionResult ActionRegistry::invoke_op(const std::string& name, const std::vector<Value>& args) {
  const OpHandler* handler = find_op(name);
  if (!handler) throw LoadError("UNKNOWN_TARGET", "no op named '" + name + "'");
  ++counts_[name];
  if (args.size() < handler->min_args || args.size() > handler->max_args)
    return ActionResult::abort("OP_FAILURE",
                               {{"op", name}, {"reason", "wrong argument count"}});
  std::vector<Value> results;
  try {
    results = handler->transform(args);
  } catch (const std::exception& e) {
    return ActionResult::abort("OP_FAILURE", {{"op", name}, {"reason", e.what()}});
  }
  Value outputs = Value::object();
  outputs["values"] = Value::array();
  for (auto& r : results) outputs["values"].push_back(std::move(r));
  return ActionResult::success(std::move(outputs));
}

std::uint64_t ActionRegistry::invocations(const std::string& name) const {
  auto it = counts_.find(name);
  return it == counts_.end() ? 0 : it->second;
}

void ActionRegistry::fill_validation_context(dsl::ValidationContext& ctx) const {
  for (const auto& [name, handler] : actions_) ctx.actions[name] = handler.signature;
  for (const auto& [name, handler] : ops_) {
    dsl::UnitSignature sig;
    sig.positional = true;
    sig.min_args = handler.min_args;
    sig.max_args = handler.max_args;
    for (std::size_t i = 0; i < handler.num_outputs; ++i)
      sig.outputs.push_back("out" + std::to_string(i));
    ctx.ops[name] = std::move(sig);
  }
}

namespace {

long long want_int(const Value& v, const char* what) {
  if (!v.is_number_integer())
    throw std::runtime_error(std::string(what) + " must be an int, got " + value_kind_name(v));
  return v.get<long long>();
}

}  // namespace

void register_builtin_ops(ActionRegistry& registry) {
  registry.register_op({"noop", 0, 0, 0, [](const std::vector<Value>&) {
                          return std::vector<Value>{};
                        }});
  registry.register_op({"assign", 1, 1, 1, [](const std::vector<Value>& args) {
                          return std::vector<Value>{args[0]};
                        }});
  registry.register_op({"get_index", 2, 2, 1, [](const std::vector<Value>& args) {
                          if (!args[0].is_array())
                            throw std::runtime_error("first arg must be a list, got " +
                                                     std::string(value_kind_name(args[0])));
                          long long i = want_int(args[1], "index");
                          if (i < 0 || static_cast<std::size_t>(i) >= args[0].size())
                            throw std::runtime_error("index " + std::to_string(i) +
                                                     " out of range for list of " +
                                                     std::to_string(args[0].size()));
                          return std::vector<Value>{args[0][static_cast<std::size_t>(i)]};
                        }});
  registry.register_op({"increment", 1, 1, 1, [](const std::vector<Value>& args) {
                          return std::vector<Value>{Value(want_int(args[0], "operand") + 1)};
                        }});
  registry.register_op({"decrement", 1, 1, 1, [](const std::vector<Value>& args) {
                          return std::vector<Value>{Value(want_int(args[0], "operand") - 1)};
                        }});
  registry.register_op({"negate", 1, 1, 1, [](const std::vector<Value>& args) {
                          const Value& v = args[0];
                          if (v.is_boolean()) return std::vector<Value>{Value(!v.get<bool>())};
                          if (v.is_number_integer())
                            return std::vector<Value>{Value(-v.get<long long>())};
                          if (v.is_number_float())
                            return std::vector<Value>{Value(-v.get<double>())};
                          throw std::runtime_error("operand must be a bool or number, got " +
                                                   std::string(value_kind_name(v)));
                        }});
  registry.register_op({"make_list", 0, SIZE_MAX, 1, [](const std::vector<Value>& args) {
                          Value list = Value::array();
                          for (const auto& a : args) list.push_back(a);
                          return std::vector<Value>{list};
                        }});
}

}  // namespace rtask::exec
