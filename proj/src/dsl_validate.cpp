#include "rtask/dsl/validate.hpp"

#include <algorithm>
#include <functional>

#include "rtask/errors.hpp"

namespace rtask::dsl {

namespace {

struct Checker {
  const TaskLibrary& lib;
  const ValidationContext& ctx;
  std::vector<Diagnostic> diags;

  void error(const std::string& task, const std::string& path, std::string code,
             std::string message) {
    diags.push_back({Severity::Error, std::move(code), std::move(message), task, path});
  }
  void warning(const std::string& task, const std::string& path, std::string code,
               std::string message) {
    diags.push_back({Severity::Warning, std::move(code), std::move(message), task, path});
  }

  bool db_key_known(const std::string& key) const {
    if (ctx.db_keys.count(key)) return true;
    // Nested field references resolve through an entry (objects.gear.length).
    for (const auto& entry : ctx.db_keys)
      if (key.size() > entry.size() && key.compare(0, entry.size(), entry) == 0 &&
          key[entry.size()] == '.')
        return true;
    return false;
  }

  void check_expression(const TaskDefinition& task, const std::string& path,
                        const Expression& expr, const std::set<std::string>& bound) {
    switch (expr.kind) {
      case ExprKind::ParamRef:
        if (std::find(task.params.begin(), task.params.end(), expr.name) == task.params.end())
          error(task.name, path, "UNKNOWN_PARAM",
                "params." + expr.name + " is not a declared parameter");
        break;
      case ExprKind::VarRef:
        if (std::find(task.vars.begin(), task.vars.end(), expr.name) == task.vars.end())
          error(task.name, path, "USE_BEFORE_DEF",
                "var." + expr.name + " is never declared in this task");
        else if (!bound.count(expr.name))
          error(task.name, path, "USE_BEFORE_DEF",
                "var." + expr.name + " may be read before any step binds it");
        break;
      case ExprKind::DbRef:
        if (ctx.check_db_keys && !db_key_known(expr.name))
          error(task.name, path, "UNKNOWN_DB_KEY", "db." + expr.name + " is not in the database");
        break;
      case ExprKind::Compare:
      case ExprKind::BoolOp:
      case ExprKind::Exists:
        for (const auto& op : expr.operands) check_expression(task, path, op, bound);
        break;
      case ExprKind::Literal:
        break;
    }
  }

  void check_unit_step(const TaskDefinition& task, const std::string& path, const Step& step) {
    std::set<std::string> provided;
    for (const auto& [name, expr] : step.params) {
      (void)expr;
      if (!provided.insert(name).second)
        error(task.name, path, "ARITY_MISMATCH", "param '" + name + "' passed twice");
    }

    if (step.kind == StepKind::Task) {
      const TaskDefinition* target = lib.find(step.target);
      if (!target) {
        error(task.name, path, "UNKNOWN_TARGET", "no task named '" + step.target + "'");
        return;
      }
      std::set<std::string> declared(target->params.begin(), target->params.end());
      for (const auto& p : provided)
        if (!declared.count(p))
          error(task.name, path, "ARITY_MISMATCH",
                "task '" + step.target + "' takes no param '" + p + "'");
      for (const auto& p : declared)
        if (!provided.count(p))
          error(task.name, path, "ARITY_MISMATCH",
                "task '" + step.target + "' needs param '" + p + "'");
      if (step.var.size() > target->vars.size())
        error(task.name, path, "ARITY_MISMATCH",
              "task '" + step.target + "' yields " + std::to_string(target->vars.size()) +
                  " output(s), step captures " + std::to_string(step.var.size()));
      return;
    }

    const auto& table = step.kind == StepKind::Action ? ctx.actions : ctx.ops;
    auto it = table.find(step.target);
    if (it == table.end()) {
      error(task.name, path, "UNKNOWN_TARGET",
            std::string("no ") + step_kind_name(step.kind) + " named '" + step.target + "'");
      return;
    }
    const UnitSignature& sig = it->second;
    if (sig.positional) {
      if (step.params.size() < sig.min_args || step.params.size() > sig.max_args)
        error(task.name, path, "ARITY_MISMATCH",
              "op '" + step.target + "' takes " + std::to_string(sig.min_args) +
                  (sig.max_args == SIZE_MAX ? "+" : ".." + std::to_string(sig.max_args)) +
                  " arg(s), got " + std::to_string(step.params.size()));
    } else {
      for (const auto& p : provided)
        if (!sig.required_params.count(p) && !sig.optional_params.count(p))
          error(task.name, path, "ARITY_MISMATCH",
                "action '" + step.target + "' takes no param '" + p + "'");
      for (const auto& p : sig.required_params)
        if (!provided.count(p))
          error(task.name, path, "ARITY_MISMATCH",
                "action '" + step.target + "' needs param '" + p + "'");
    }
    if (step.var.size() > sig.outputs.size())
      error(task.name, path, "ARITY_MISMATCH",
            "'" + step.target + "' yields " + std::to_string(sig.outputs.size()) +
                " output(s), step captures " + std::to_string(step.var.size()));
  }

  // Definite-assignment walk. Returns the vars certainly bound after the
  // list runs; `bound` is the set known on entry.
  std::set<std::string> check_steps(const TaskDefinition& task, const std::string& parent_path,
                                    const std::vector<Step>& steps, std::set<std::string> bound) {
    std::set<std::string> names;
    for (const Step& step : steps) {
      const std::string path =
          parent_path.empty() ? step.name : parent_path + "/" + step.name;
      if (!names.insert(step.name).second)
        error(task.name, path, "DUPLICATE_STEP",
              "step name '" + step.name + "' reused in one step list");

      for (const auto& [pname, expr] : step.params) {
        (void)pname;
        check_expression(task, path, expr, bound);
      }
      if (step.condition) check_expression(task, path, *step.condition, bound);

      for (const auto& v : step.var)
        if (std::find(task.vars.begin(), task.vars.end(), v) == task.vars.end())
          error(task.name, path, "UNDECLARED_VAR",
                "step binds var '" + v + "' which the task never declares");

      switch (step.kind) {
        case StepKind::Action:
        case StepKind::Task:
        case StepKind::Op:
          check_unit_step(task, path, step);
          bound.insert(step.var.begin(), step.var.end());
          break;
        case StepKind::Choice: {
          if (step.condition->kind == ExprKind::Literal &&
              step.condition->literal.is_boolean()) {
            bool lit = step.condition->literal.get<bool>();
            if (lit && !step.if_false.empty())
              warning(task.name, path, "UNREACHABLE_STEP",
                      "condition is always true; if_false never runs");
            if (!lit && !step.if_true.empty())
              warning(task.name, path, "UNREACHABLE_STEP",
                      "condition is always false; if_true never runs");
          }
          auto after_true = check_steps(task, path, step.if_true, bound);
          auto after_false = check_steps(task, path, step.if_false, bound);
          std::set<std::string> both;
          std::set_intersection(after_true.begin(), after_true.end(), after_false.begin(),
                                after_false.end(), std::inserter(both, both.begin()));
          bound = std::move(both);
          break;
        }
        case StepKind::Loop: {
          if (step.condition->kind == ExprKind::Literal &&
              step.condition->literal.is_boolean() && !step.condition->literal.get<bool>())
            warning(task.name, path, "UNREACHABLE_STEP",
                    "condition is always false; body never runs");
          // The body may run zero times, so its bindings do not count after.
          check_steps(task, path, step.body, bound);
          break;
        }
      }
    }
    return bound;
  }

  void check_recursion() {
    enum Color { White, Grey, Black };
    std::map<std::string, Color> color;
    std::set<std::string> reported;

    std::function<void(const std::vector<Step>&, std::vector<std::string>&)> visit_steps;
    std::function<void(const std::string&, std::vector<std::string>&)> visit;

    visit_steps = [&](const std::vector<Step>& steps, std::vector<std::string>& chain) {
      for (const auto& step : steps) {
        if (step.kind == StepKind::Task) visit(step.target, chain);
        visit_steps(step.if_true, chain);
        visit_steps(step.if_false, chain);
        visit_steps(step.body, chain);
      }
    };
    visit = [&](const std::string& name, std::vector<std::string>& chain) {
      const TaskDefinition* def = lib.find(name);
      if (!def) return;
      if (color[name] == Grey) {
        auto it = std::find(chain.begin(), chain.end(), name);
        for (; it != chain.end(); ++it) {
          if (reported.insert(*it).second)
            error(*it, "", "RECURSIVE_TASK", "task '" + *it + "' is part of an invocation cycle");
        }
        return;
      }
      if (color[name] == Black) return;
      color[name] = Grey;
      chain.push_back(name);
      visit_steps(def->steps, chain);
      chain.pop_back();
      color[name] = Black;
    };

    for (const auto& [name, def] : lib.definitions) {
      (void)def;
      std::vector<std::string> chain;
      visit(name, chain);
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate(TaskLibrary& lib, const ValidationContext& ctx) {
  Checker checker{lib, ctx, {}};
  for (const auto& [name, task] : lib.definitions) {
    (void)name;
    checker.check_steps(task, "", task.steps, {});
  }
  checker.check_recursion();
  sort_diagnostics(checker.diags);
  lib.validated = !has_errors(checker.diags);
  return checker.diags;
}

namespace {

struct Expander {
  const TaskLibrary& lib;
  std::map<std::string, std::size_t> ordinals;

  ExpandedNode expand_step(const Step& step) {
    ExpandedNode node;
    node.name = step.name;
    node.kind = step.kind;
    node.target = step.target;
    switch (step.kind) {
      case StepKind::Action:
      case StepKind::Op:
        node.ordinal = ++ordinals[step.target];
        break;
      case StepKind::Task: {
        node.ordinal = ++ordinals[step.target];
        const TaskDefinition* def = lib.find(step.target);
        for (const auto& child : def->steps) node.children.push_back(expand_step(child));
        break;
      }
      case StepKind::Choice:
        node.ordinal = ++ordinals[step.name];
        for (const auto& child : step.if_true) {
          node.children.push_back(expand_step(child));
          node.children.back().branch = "T";
        }
        for (const auto& child : step.if_false) {
          node.children.push_back(expand_step(child));
          node.children.back().branch = "F";
        }
        break;
      case StepKind::Loop:
        node.ordinal = ++ordinals[step.name];
        for (const auto& child : step.body) {
          node.children.push_back(expand_step(child));
          node.children.back().branch = "B";
        }
        break;
    }
    return node;
  }
};

void dot_escape(const std::string& in, std::string& out) {
  for (char c : in) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
}

void emit_dot(const ExpandedNode& node, std::size_t& next_id, std::size_t parent_id,
              std::string& out) {
  std::size_t id = next_id++;
  std::string label;
  if (node.kind == StepKind::Choice) label = "C ";
  if (node.kind == StepKind::Loop) label = "L ";
  label += node.name;
  if (node.ordinal > 1) label += " #" + std::to_string(node.ordinal);
  out += "  n" + std::to_string(id) + " [label=\"";
  dot_escape(label, out);
  out += "\"";
  if (node.kind == StepKind::Choice || node.kind == StepKind::Loop) out += " shape=diamond";
  out += "];\n";
  if (id != parent_id) {
    out += "  n" + std::to_string(parent_id) + " -> n" + std::to_string(id);
    if (!node.branch.empty()) out += " [label=\"" + node.branch + "\"]";
    out += ";\n";
  }
  for (const auto& child : node.children) emit_dot(child, next_id, id, out);
}

}  // namespace

ExpandedNode expand_tree(const TaskLibrary& lib, const std::string& root_task,
                         const Value& static_bindings) {
  (void)static_bindings;  // binds the root params; the shape never depends on values
  const TaskDefinition* def = lib.find(root_task);
  if (!def) throw LoadError("UNKNOWN_ROOT", "no task named '" + root_task + "'");
  if (!lib.validated)
    throw LoadError("STRUCTURE_ERROR", "expand_tree needs a validated library");

  Expander expander{lib, {}};
  ExpandedNode root;
  root.name = root_task;
  root.kind = StepKind::Task;
  root.target = root_task;
  root.ordinal = ++expander.ordinals[root_task];
  for (const auto& step : def->steps) root.children.push_back(expander.expand_step(step));
  return root;
}

std::size_t count_nodes(const ExpandedNode& node) {
  std::size_t n = 1;
  for (const auto& child : node.children) n += count_nodes(child);
  return n;
}

std::string expand_tree_to_dot(const ExpandedNode& root) {
  std::string out = "digraph task_tree {\n  rankdir=TB;\n  node [shape=box];\n";
  std::size_t next_id = 0;
  emit_dot(root, next_id, 0, out);
  out += "}\n";
  return out;
}

}  // namespace rtask::dsl
