#include "rtask/dsl/serialize.hpp"

#include <yaml-cpp/yaml.h>

namespace rtask::dsl {

namespace {

// Numbers go out through the JSON shortest-round-trip formatter so reparsing
// yields the same value; strings are always double-quoted so they can never
// be mistaken for references, numbers, or booleans.
void emit_value(YAML::Emitter& out, const Value& v) {
  if (v.is_string()) {
    out << YAML::DoubleQuoted << v.get<std::string>();
  } else if (v.is_array()) {
    out << YAML::BeginSeq;
    for (const auto& item : v) emit_value(out, item);
    out << YAML::EndSeq;
  } else if (v.is_object()) {
    out << YAML::BeginMap;
    for (const auto& [key, item] : v.items()) {
      out << YAML::Key << key << YAML::Value;
      emit_value(out, item);
    }
    out << YAML::EndMap;
  } else {
    out << v.dump();
  }
}

void emit_param_expression(YAML::Emitter& out, const Expression& e) {
  switch (e.kind) {
    case ExprKind::ParamRef: out << ("params." + e.name); return;
    case ExprKind::VarRef: out << ("var." + e.name); return;
    case ExprKind::DbRef: out << ("db." + e.name); return;
    default: emit_value(out, e.literal); return;
  }
}

void emit_steps(YAML::Emitter& out, const std::vector<Step>& steps);

void emit_step(YAML::Emitter& out, const Step& step) {
  out << YAML::BeginMap;
  out << YAML::Key << step_kind_name(step.kind) << YAML::Value << step.name;
  if ((step.kind == StepKind::Action || step.kind == StepKind::Task || step.kind == StepKind::Op) &&
      step.target != step.name)
    out << YAML::Key << "target" << YAML::Value << step.target;
  if (!step.params.empty()) {
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    for (const auto& [name, expr] : step.params) {
      out << YAML::Key << name << YAML::Value;
      emit_param_expression(out, expr);
    }
    out << YAML::EndMap;
  }
  if (!step.var.empty()) {
    out << YAML::Key << "var" << YAML::Value << YAML::Flow << step.var;
  }
  if (step.condition)
    out << YAML::Key << "condition" << YAML::Value << YAML::DoubleQuoted
        << expression_to_string(*step.condition);
  if (!step.if_true.empty()) {
    out << YAML::Key << "if_true" << YAML::Value;
    emit_steps(out, step.if_true);
  }
  if (!step.if_false.empty()) {
    out << YAML::Key << "if_false" << YAML::Value;
    emit_steps(out, step.if_false);
  }
  if (!step.body.empty()) {
    out << YAML::Key << "body" << YAML::Value;
    emit_steps(out, step.body);
  }
  out << YAML::EndMap;
}

void emit_steps(YAML::Emitter& out, const std::vector<Step>& steps) {
  out << YAML::BeginSeq;
  for (const auto& step : steps) emit_step(out, step);
  out << YAML::EndSeq;
}

void emit_task(YAML::Emitter& out, const TaskDefinition& task) {
  out << YAML::BeginMap;
  if (!task.params.empty()) out << YAML::Key << "params" << YAML::Value << YAML::Flow << task.params;
  if (!task.vars.empty()) out << YAML::Key << "var" << YAML::Value << YAML::Flow << task.vars;
  out << YAML::Key << "steps" << YAML::Value;
  emit_steps(out, task.steps);
  out << YAML::EndMap;
}

}  // namespace

std::string serialize_task(const TaskDefinition& task) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << task.name << YAML::Value;
  emit_task(out, task);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string serialize_library(const TaskLibrary& lib) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  for (const auto& [name, task] : lib.definitions) {
    out << YAML::Key << name << YAML::Value;
    emit_task(out, task);
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace rtask::dsl
