#include "rtask/exec/engine.hpp"

#include <algorithm>

#include "rtask/errors.hpp"

namespace rtask::exec {

namespace {

Value locals_to_json(const std::map<std::string, Value>& locals) {
  Value out = Value::object();
  for (const auto& [name, value] : locals) out[name] = value;
  return out;
}

std::vector<std::string> task_unit_path(const ExecutionSession& session) {
  std::vector<std::string> path;
  for (const auto& frame : session.stack)
    if (frame.kind == FrameKind::Task) path.push_back(frame.unit);
  return path;
}

std::string abort_key(const std::vector<std::string>& path, const std::string& leaf) {
  std::string key;
  for (const auto& part : path) {
    key += part;
    key += '/';
  }
  key += '|';
  key += leaf;
  return key;
}

const char* frame_unit_kind(const Frame& frame) {
  switch (frame.kind) {
    case FrameKind::Task: return "task";
    case FrameKind::Branch: return "branch";
    case FrameKind::LoopBody: return "loop";
  }
  return "?";
}

// Restores the belief hook that was in place before a nested run.
struct HookGuard {
  knowledge::BeliefState& beliefs;
  std::function<void(const std::string&, double, std::uint64_t)> saved;
  HookGuard(knowledge::BeliefState& b,
            std::function<void(const std::string&, double, std::uint64_t)> hook)
      : beliefs(b), saved(std::move(b.on_update)) {
    beliefs.on_update = std::move(hook);
  }
  ~HookGuard() { beliefs.on_update = std::move(saved); }
};

}  // namespace

Engine::Engine(const dsl::TaskLibrary& lib, ActionRegistry& registry,
               const knowledge::Database& db, knowledge::BeliefState& beliefs, Trace& trace,
               std::string session_id)
    : lib_(lib), registry_(registry), db_(db), beliefs_(beliefs), trace_(trace),
      session_id_(std::move(session_id)) {}

Frame& Engine::locals_frame(ExecutionSession& session) {
  for (auto it = session.stack.rbegin(); it != session.stack.rend(); ++it)
    if (it->kind == FrameKind::Task) return *it;
  throw LoadError("INVALID_STATE", "no task frame on the stack");
}

Scope Engine::scope_for(ExecutionSession& session) {
  Frame& frame = locals_frame(session);
  return Scope{&frame.params, &frame.locals, &db_};
}

std::vector<std::string> Engine::current_path(const ExecutionSession& session) const {
  std::vector<std::string> path;
  for (const auto& frame : session.stack) path.push_back(frame.name);
  return path;
}

ExecutionSession Engine::execute(const std::string& root, const Value& inputs) {
  if (!lib_.validated)
    throw LoadError("INVALID_STATE", "library must be validated before execution");
  const dsl::TaskDefinition* def = lib_.find(root);
  if (!def) throw LoadError("UNKNOWN_UNIT", "no task named '" + root + "'");
  if (!inputs.is_object())
    throw LoadError("ARITY_MISMATCH", "inputs for '" + root + "' must be an object");
  for (const auto& p : def->params)
    if (!inputs.contains(p))
      throw LoadError("ARITY_MISMATCH", "missing input '" + p + "' for '" + root + "'");
  for (const auto& [key, value] : inputs.items()) {
    (void)value;
    if (std::find(def->params.begin(), def->params.end(), key) == def->params.end())
      throw LoadError("ARITY_MISMATCH", "'" + root + "' takes no input '" + key + "'");
  }

  ExecutionSession session;
  session.id = session_id_;
  session.root = root;
  session.status = SessionStatus::Running;

  Frame frame;
  frame.kind = FrameKind::Task;
  frame.name = root;
  frame.unit = root;
  frame.steps = &def->steps;
  frame.params = inputs;
  frame.original_params = inputs;
  session.stack.push_back(std::move(frame));
  session.ordinals[root] = 1;

  trace_.append("run_start", {root},
                {{"session", session_id_}, {"root", root}, {"inputs", inputs}});
  run(session);
  return session;
}

void Engine::run(ExecutionSession& session) {
  HookGuard guard(beliefs_, [this](const std::string& key, double value, std::uint64_t counter) {
    trace_.append("belief_update", {},
                  {{"session", session_id_}, {"key", key}, {"value", value},
                   {"counter", counter}});
  });

  while (session.status == SessionStatus::Running) {
    if (cancel_.requested()) {
      session.status = SessionStatus::Preempted;
      trace_.append("session_end", current_path(session),
                    {{"session", session_id_}, {"status", "PREEMPTED"}});
      return;
    }
    Frame& top = session.stack.back();
    if (top.step_index >= top.steps->size()) {
      complete_frame(session);
      continue;
    }
    dispatch_step(session, (*top.steps)[top.step_index]);
  }
}

void Engine::dispatch_step(ExecutionSession& session, const dsl::Step& step) {
  std::vector<std::string> path = current_path(session);
  path.push_back(step.name);
  ++session.ordinals[step.target.empty() ? step.name : step.target];
  trace_.append("step_start", path,
                {{"session", session_id_}, {"kind", dsl::step_kind_name(step.kind)},
                 {"target", step.target}});

  // Eager param evaluation so fault snapshots show what was actually passed.
  Value params = Value::object();
  std::vector<Value> args;
  {
    Scope scope = scope_for(session);
    for (const auto& [name, expr] : step.params) {
      Value v;
      try {
        v = evaluate(expr, scope);
      } catch (const LoadError& e) {
        trace_.append("step_end", path,
                      {{"session", session_id_}, {"status", "ABORTED"},
                       {"error_signal", "INTERNAL"}});
        raise_fault(session, &step, "internal", "INTERNAL",
                    {{"code", e.code()}, {"message", e.what()}}, params);
        return;
      }
      params[name] = v;
      args.push_back(std::move(v));
    }
  }

  switch (step.kind) {
    case dsl::StepKind::Action:
    case dsl::StepKind::Op: {
      bool is_action = step.kind == dsl::StepKind::Action;
      ActionResult result;
      ActionRuntime rt;
      rt.cancel = cancel_;
      rt.beliefs = &beliefs_;
      rt.db = &db_;
      if (is_action) {
        result = registry_.invoke_action(step.target, params, rt);
      } else {
        result = registry_.invoke_op(step.target, args);
        rt.ordinal = registry_.invocations(step.target);
      }

      Value report = {{"session", session_id_}, {"unit", step.target},
                      {"kind", is_action ? "action" : "op"}, {"ordinal", rt.ordinal},
                      {"status", action_status_name(result.status)}};
      if (result.status == ActionStatus::Succeeded) report["outputs"] = result.outputs;
      if (result.status == ActionStatus::Aborted) {
        report["error_signal"] = result.error_signal;
        report["error_fields"] = result.error_fields;
      }
      trace_.append("action_result", path, std::move(report));

      if (result.status == ActionStatus::Preempted) {
        trace_.append("step_end", path, {{"session", session_id_}, {"status", "PREEMPTED"}});
        session.status = SessionStatus::Preempted;
        trace_.append("session_end", current_path(session),
                      {{"session", session_id_}, {"status", "PREEMPTED"}});
        if (observer_.on_leaf_result)
          observer_.on_leaf_result(task_unit_path(session), step.target,
                                   ActionStatus::Preempted);
        return;
      }
      if (result.status == ActionStatus::Aborted) {
        trace_.append("step_end", path,
                      {{"session", session_id_}, {"status", "ABORTED"},
                       {"error_signal", result.error_signal}});
        raise_fault(session, &step, is_action ? "action" : "op", result.error_signal,
                    result.error_fields, params);
        return;
      }

      // Positional output binding against the declared output order.
      std::vector<Value> bound;
      for (std::size_t i = 0; i < step.var.size(); ++i) {
        if (is_action) {
          const ActionHandler* handler = registry_.find_action(step.target);
          if (i >= handler->signature.outputs.size() ||
              !result.outputs.contains(handler->signature.outputs[i])) {
            trace_.append("step_end", path,
                          {{"session", session_id_}, {"status", "ABORTED"},
                           {"error_signal", "UNBOUND_OUTPUT"}});
            raise_fault(session, &step, "action", "UNBOUND_OUTPUT",
                        {{"missing", i < handler->signature.outputs.size()
                                         ? handler->signature.outputs[i]
                                         : "output " + std::to_string(i)}},
                        params);
            return;
          }
          bound.push_back(result.outputs[handler->signature.outputs[i]]);
        } else {
          const Value& values = result.outputs["values"];
          if (i >= values.size()) {
            trace_.append("step_end", path,
                          {{"session", session_id_}, {"status", "ABORTED"},
                           {"error_signal", "UNBOUND_OUTPUT"}});
            raise_fault(session, &step, "op", "UNBOUND_OUTPUT",
                        {{"missing", "output " + std::to_string(i)}}, params);
            return;
          }
          bound.push_back(values[i]);
        }
      }
      Frame& target_frame = locals_frame(session);
      for (std::size_t i = 0; i < step.var.size(); ++i)
        target_frame.locals[step.var[i]] = std::move(bound[i]);

      if (observer_.on_leaf_result)
        observer_.on_leaf_result(task_unit_path(session), step.target, ActionStatus::Succeeded);
      consecutive_aborts_.erase(abort_key(task_unit_path(session), step.target));
      trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
      session.stack.back().step_index++;
      return;
    }

    case dsl::StepKind::Task: {
      const dsl::TaskDefinition* def = lib_.find(step.target);
      Frame frame;
      frame.kind = FrameKind::Task;
      frame.name = step.name;
      frame.unit = step.target;
      frame.steps = &def->steps;
      frame.params = params;
      frame.original_params = params;
      frame.capture_vars = step.var;
      frame.owner_step = &step;
      session.stack.push_back(std::move(frame));
      return;
    }

    case dsl::StepKind::Choice: {
      bool taken;
      try {
        Scope scope = scope_for(session);
        taken = evaluate_condition(*step.condition, scope);
      } catch (const LoadError& e) {
        trace_.append("step_end", path,
                      {{"session", session_id_}, {"status", "ABORTED"},
                       {"error_signal", "INTERNAL"}});
        raise_fault(session, &step, "internal", "INTERNAL",
                    {{"code", e.code()}, {"message", e.what()}}, params);
        return;
      }
      trace_.append("condition_eval", path,
                    {{"session", session_id_},
                     {"condition", dsl::expression_to_string(*step.condition)},
                     {"result", taken}});
      const std::vector<dsl::Step>& branch = taken ? step.if_true : step.if_false;
      if (branch.empty()) {
        trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
        session.stack.back().step_index++;
        return;
      }
      Frame frame;
      frame.kind = FrameKind::Branch;
      frame.name = step.name + ".branch";
      frame.steps = &branch;
      frame.owner_step = &step;
      session.stack.push_back(std::move(frame));
      return;
    }

    case dsl::StepKind::Loop: {
      bool more;
      try {
        Scope scope = scope_for(session);
        more = evaluate_condition(*step.condition, scope);
      } catch (const LoadError& e) {
        trace_.append("step_end", path,
                      {{"session", session_id_}, {"status", "ABORTED"},
                       {"error_signal", "INTERNAL"}});
        raise_fault(session, &step, "internal", "INTERNAL",
                    {{"code", e.code()}, {"message", e.what()}}, params);
        return;
      }
      trace_.append("condition_eval", path,
                    {{"session", session_id_},
                     {"condition", dsl::expression_to_string(*step.condition)},
                     {"result", more}});
      if (!more) {
        trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
        session.stack.back().step_index++;
        return;
      }
      trace_.append("loop_iteration", path, {{"session", session_id_}, {"iteration", 1}});
      Frame frame;
      frame.kind = FrameKind::LoopBody;
      frame.name = step.name + ".branch";
      frame.steps = &step.body;
      frame.owner_step = &step;
      frame.loop_iteration = 1;
      session.stack.push_back(std::move(frame));
      return;
    }
  }
}

void Engine::complete_frame(ExecutionSession& session) {
  Frame done = session.stack.back();

  switch (done.kind) {
    case FrameKind::Task: {
      const dsl::TaskDefinition* def = lib_.find(done.unit);
      for (const auto& v : def->vars) {
        if (!done.locals.count(v)) {
          raise_fault(session, nullptr, "internal", "UNBOUND_OUTPUT",
                      {{"missing", v}, {"unit", done.unit}}, done.params);
          return;
        }
      }
      if (observer_.on_task_success) observer_.on_task_success(done.unit);

      if (session.stack.size() == 1) {
        for (const auto& v : def->vars) session.outputs[v] = done.locals.at(v);
        session.status = SessionStatus::Succeeded;
        trace_.append("session_end", current_path(session),
                      {{"session", session_id_}, {"status", "SUCCEEDED"},
                       {"outputs", session.outputs}});
        return;
      }

      session.stack.pop_back();
      Frame& parent = session.stack.back();
      if (!done.capture_vars.empty()) {
        Frame& target = locals_frame(session);
        for (std::size_t i = 0; i < done.capture_vars.size(); ++i)
          target.locals[done.capture_vars[i]] = done.locals.at(def->vars[i]);
      }
      std::vector<std::string> path = current_path(session);
      path.push_back((*parent.steps)[parent.step_index].name);
      trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
      parent.step_index++;
      return;
    }

    case FrameKind::Branch: {
      session.stack.pop_back();
      Frame& parent = session.stack.back();
      std::vector<std::string> path = current_path(session);
      path.push_back((*parent.steps)[parent.step_index].name);
      trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
      parent.step_index++;
      return;
    }

    case FrameKind::LoopBody: {
      std::uint64_t iteration = done.loop_iteration;
      const dsl::Step* owner = done.owner_step;
      session.stack.pop_back();
      std::vector<std::string> path = current_path(session);
      path.push_back(owner->name);

      bool more;
      try {
        Scope scope = scope_for(session);
        more = evaluate_condition(*owner->condition, scope);
      } catch (const LoadError& e) {
        raise_fault(session, owner, "internal", "INTERNAL",
                    {{"code", e.code()}, {"message", e.what()}}, Value::object());
        return;
      }
      trace_.append("condition_eval", path,
                    {{"session", session_id_},
                     {"condition", dsl::expression_to_string(*owner->condition)},
                     {"result", more}});
      if (!more) {
        trace_.append("step_end", path, {{"session", session_id_}, {"status", "SUCCEEDED"}});
        session.stack.back().step_index++;
        return;
      }
      trace_.append("loop_iteration", path,
                    {{"session", session_id_}, {"iteration", iteration + 1}});
      Frame frame;
      frame.kind = FrameKind::LoopBody;
      frame.name = owner->name + ".branch";
      frame.steps = &owner->body;
      frame.owner_step = owner;
      frame.loop_iteration = iteration + 1;
      session.stack.push_back(std::move(frame));
      return;
    }
  }
}

void Engine::raise_fault(ExecutionSession& session, const dsl::Step* step,
                         const std::string& unit_kind, const std::string& signal,
                         Value error_fields, const Value& leaf_params) {
  FaultContext fault;
  const Frame* innermost_loop = nullptr;
  for (const auto& frame : session.stack) {
    FaultLevel level;
    level.unit = frame.kind == FrameKind::Task ? frame.unit : frame.name;
    level.unit_kind = frame_unit_kind(frame);
    level.step_index = frame.step_index;
    if (frame.steps && frame.step_index < frame.steps->size())
      level.step_name = (*frame.steps)[frame.step_index].name;
    level.params = frame.params;
    level.locals = locals_to_json(frame.locals);
    fault.chain.push_back(std::move(level));
    if (frame.kind == FrameKind::LoopBody) innermost_loop = &frame;
  }

  FaultLevel leaf;
  if (step) {
    leaf.unit = step->target.empty() ? step->name : step->target;
    leaf.unit_kind = unit_kind;
    leaf.step_index = session.stack.back().step_index;
    leaf.step_name = step->name;
    leaf.params = leaf_params;
    fault.chain.push_back(std::move(leaf));
  } else {
    // Frame-completion fault: the frame itself is the leaf.
    fault.chain.back().unit_kind = unit_kind;
  }

  if (innermost_loop && !error_fields.contains("loop_iteration"))
    error_fields["loop_iteration"] = innermost_loop->loop_iteration;
  fault.error_signal = signal;
  fault.error_fields = std::move(error_fields);
  fault.beliefs = beliefs_.snapshot();

  std::vector<std::string> units = task_unit_path(session);
  std::string leaf_unit = fault.chain.back().unit;
  if (fault.chain.back().unit_kind == "task" || !step) {
    // Leaf is the faulted frame itself; count it under its own name.
    if (!units.empty() && units.back() == leaf_unit) units.pop_back();
  }
  fault.consecutive_abort_count = ++consecutive_aborts_[abort_key(units, leaf_unit)];

  session.fault = fault;
  session.status = SessionStatus::PausedOnFault;

  std::vector<std::string> path = current_path(session);
  if (step) path.push_back(step->name);
  trace_.append("fault", path,
                {{"session", session_id_}, {"context", fault.to_json()}});
  if (observer_.on_leaf_result)
    observer_.on_leaf_result(units, leaf_unit, ActionStatus::Aborted);
}

void Engine::resume(ExecutionSession& session, const ResumptionDirective& directive) {
  if (session.status != SessionStatus::PausedOnFault)
    throw LoadError("INVALID_STATE", "session is not paused on a fault");

  std::size_t target = session.stack.size();
  for (std::size_t i = session.stack.size(); i-- > 0;) {
    const Frame& frame = session.stack[i];
    if (frame.kind != FrameKind::Task) continue;
    if (directive.target_level.empty() || frame.unit == directive.target_level ||
        frame.name == directive.target_level) {
      target = i;
      break;
    }
  }
  if (target == session.stack.size())
    throw LoadError("INVALID_TARGET",
                    "'" + directive.target_level + "' names no task frame on the stack");

  trace_.append("resumption", current_path(session),
                {{"session", session_id_},
                 {"strategy", resumption_strategy_name(directive.strategy)},
                 {"target_level", directive.target_level.empty()
                                      ? session.stack[target].unit
                                      : directive.target_level}});

  if (directive.strategy == ResumptionStrategy::None) {
    session.status = SessionStatus::AbortedFinal;
    trace_.append("session_end", current_path(session),
                  {{"session", session_id_}, {"status", "ABORTED_FINAL"}});
    return;
  }

  session.stack.resize(target + 1);
  Frame& frame = session.stack.back();
  switch (directive.strategy) {
    case ResumptionStrategy::Continue:
      break;
    case ResumptionStrategy::Retry:
      frame.step_index = 0;
      frame.params = frame.original_params;
      frame.locals.clear();
      break;
    case ResumptionStrategy::Next:
      if (frame.step_index < frame.steps->size()) frame.step_index++;
      break;
    case ResumptionStrategy::Previous:
      frame.step_index = frame.step_index == 0 ? 0 : frame.step_index - 1;
      break;
    case ResumptionStrategy::None:
      break;
  }

  session.fault.reset();
  session.status = SessionStatus::Running;
  run(session);
}

std::string execute_unit_isolated(const dsl::TaskLibrary& lib, ActionRegistry& registry,
                                  const knowledge::Database& db, knowledge::BeliefState& beliefs,
                                  Trace& trace, const std::string& unit,
                                  const std::string& input_json) {
  Value inputs = Value::parse(input_json, nullptr, false);
  if (inputs.is_discarded() || !inputs.is_object())
    throw LoadError("DESERIALIZATION_ERROR", "input document must be a JSON object");

  Value result = Value::object();
  if (registry.has_action(unit)) {
    ActionRuntime rt;
    rt.beliefs = &beliefs;
    rt.db = &db;
    ActionResult r = registry.invoke_action(unit, inputs, rt);
    trace.append("action_result", {unit},
                 {{"session", "isolated"}, {"unit", unit}, {"kind", "action"},
                  {"ordinal", rt.ordinal}, {"status", action_status_name(r.status)}});
    result["status"] = action_status_name(r.status);
    if (r.status == ActionStatus::Succeeded) result["outputs"] = r.outputs;
    if (r.status == ActionStatus::Aborted) {
      result["error_signal"] = r.error_signal;
      result["error_fields"] = r.error_fields;
    }
    return result.dump();
  }

  if (lib.has(unit)) {
    Engine engine(lib, registry, db, beliefs, trace, "isolated");
    ExecutionSession session = engine.execute(unit, inputs);
    switch (session.status) {
      case SessionStatus::Succeeded: result["status"] = "SUCCEEDED"; break;
      case SessionStatus::PausedOnFault: result["status"] = "ABORTED"; break;
      default: result["status"] = session_status_name(session.status); break;
    }
    result["outputs"] = session.outputs;
    if (session.fault) result["fault_context"] = session.fault->to_json();
    return result.dump();
  }

  throw LoadError("UNKNOWN_UNIT", "'" + unit + "' is neither a task nor an action");
}

}  // namespace rtask::exec
