#include "rtask/monitor/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"

namespace rtask::monitor {

const char* recovery_outcome_name(RecoveryOutcome outcome) {
  return outcome == RecoveryOutcome::RecoverySucceeded ? "RECOVERY_SUCCEEDED"
                                                       : "RECOVERY_FAILED";
}

bool glob_match(const std::string& pattern, const std::string& text) {
  std::size_t p = 0, t = 0;
  std::size_t star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

namespace {

[[noreturn]] void fail(const char* code, const YAML::Node& node, const std::string& message) {
  throw LoadError(code, message, node.Mark().line, node.Mark().column);
}

std::string scalar(const YAML::Node& node, const char* what) {
  if (!node.IsScalar()) fail("STRUCTURE_ERROR", node, std::string(what) + " must be a scalar");
  return node.as<std::string>();
}

std::uint64_t count_of(const YAML::Node& node, const char* what) {
  Value v = yaml_to_value(node);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail("STRUCTURE_ERROR", node, std::string(what) + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

RuleResumption parse_resumption_node(const YAML::Node& node, const std::string& rule_id) {
  if (!node.IsMap())
    fail("STRUCTURE_ERROR", node, "rule '" + rule_id + "': resumption must be a map");
  RuleResumption out;
  bool have_strategy = false;
  for (const auto& item : node) {
    std::string key = item.first.as<std::string>();
    if (key == "strategy") {
      out.strategy = exec::parse_resumption_strategy(scalar(item.second, "strategy"));
      have_strategy = true;
    } else if (key == "target_level") {
      out.target_level = scalar(item.second, "target_level");
    } else {
      fail("STRUCTURE_ERROR", item.second, "rule '" + rule_id + "': unknown resumption key '" +
                                               key + "'");
    }
  }
  if (!have_strategy)
    fail("STRUCTURE_ERROR", node, "rule '" + rule_id + "': resumption needs a strategy");
  return out;
}

RecoveryParam parse_param_source(const YAML::Node& node, const std::string& rule_id) {
  RecoveryParam out;
  if (node.IsMap() && node["from"]) {
    std::string from = scalar(node["from"], "param 'from'");
    for (const auto& item : node) {
      std::string key = item.first.as<std::string>();
      if (key != "from" && key != "key" && key != "value")
        fail("STRUCTURE_ERROR", item.second,
             "rule '" + rule_id + "': unknown param source key '" + key + "'");
    }
    if (from == "literal") {
      out.kind = RecoveryParam::Kind::Literal;
      if (!node["value"])
        fail("STRUCTURE_ERROR", node, "rule '" + rule_id + "': literal source needs 'value'");
      out.literal = yaml_to_value(node["value"]);
      return out;
    }
    if (!node["key"])
      fail("STRUCTURE_ERROR", node, "rule '" + rule_id + "': '" + from + "' source needs 'key'");
    out.key = scalar(node["key"], "param 'key'");
    if (from == "belief") {
      out.kind = RecoveryParam::Kind::BeliefRef;
    } else if (from == "context") {
      out.kind = RecoveryParam::Kind::ContextField;
    } else if (from == "db") {
      out.kind = RecoveryParam::Kind::DbRef;
    } else {
      fail("STRUCTURE_ERROR", node,
           "rule '" + rule_id + "': param source must be literal/belief/context/db");
    }
    return out;
  }
  out.kind = RecoveryParam::Kind::Literal;
  out.literal = yaml_to_value(node);
  return out;
}

void check_target_in_suffix(const RecoveryRule& rule, const RuleResumption& resumption,
                            const YAML::Node& node) {
  if (resumption.target_level.empty()) return;
  if (std::find(rule.task_path_suffix.begin(), rule.task_path_suffix.end(),
                resumption.target_level) == rule.task_path_suffix.end())
    fail("STRUCTURE_ERROR", node,
         "rule '" + rule.id + "': resumption target '" + resumption.target_level +
             "' does not appear in task_path_suffix");
}

RecoveryRule parse_rule(const YAML::Node& node, const dsl::TaskLibrary& recovery_lib,
                        const std::set<std::string>& belief_keys) {
  if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "each rule must be a map");
  if (!node["id"]) fail("STRUCTURE_ERROR", node, "rule is missing an id");

  RecoveryRule rule;
  rule.id = scalar(node["id"], "id");

  for (const auto& item : node) {
    std::string key = item.first.as<std::string>();
    if (key != "id" && key != "match" && key != "recovery" && key != "resumption" &&
        key != "on_recovery_success" && key != "on_recovery_failure")
      fail("STRUCTURE_ERROR", item.second, "rule '" + rule.id + "': unknown key '" + key + "'");
  }

  if (node["match"]) {
    const YAML::Node& match = node["match"];
    if (!match.IsMap())
      fail("STRUCTURE_ERROR", match, "rule '" + rule.id + "': match must be a map");
    for (const auto& item : match) {
      std::string key = item.first.as<std::string>();
      const YAML::Node& v = item.second;
      if (key == "task_path_suffix") {
        if (!v.IsSequence())
          fail("STRUCTURE_ERROR", v, "rule '" + rule.id + "': task_path_suffix must be a list");
        for (const auto& name : v)
          rule.task_path_suffix.push_back(scalar(name, "task_path_suffix entry"));
      } else if (key == "action_name") {
        rule.action_name = scalar(v, "action_name");
      } else if (key == "error_signal") {
        rule.error_signal_pattern = scalar(v, "error_signal");
      } else if (key == "min_consecutive_aborts") {
        rule.min_consecutive_aborts = count_of(v, "min_consecutive_aborts");
        rule.explicit_abort_bounds = true;
      } else if (key == "max_consecutive_aborts") {
        rule.max_consecutive_aborts = count_of(v, "max_consecutive_aborts");
        rule.explicit_abort_bounds = true;
      } else if (key == "beliefs") {
        if (!v.IsSequence())
          fail("STRUCTURE_ERROR", v, "rule '" + rule.id + "': beliefs must be a list");
        for (const auto& pred : v) {
          if (!pred.IsMap() || !pred["key"] || !pred["op"] || !pred["threshold"])
            fail("STRUCTURE_ERROR", pred,
                 "rule '" + rule.id + "': belief predicate needs key/op/threshold");
          BeliefPredicate bp;
          bp.key = scalar(pred["key"], "belief key");
          std::string op = scalar(pred["op"], "belief op");
          if (op == "<") {
            bp.less_than = true;
          } else if (op == ">=") {
            bp.less_than = false;
          } else {
            fail("STRUCTURE_ERROR", pred["op"],
                 "rule '" + rule.id + "': belief op must be '<' or '>='");
          }
          Value t = yaml_to_value(pred["threshold"]);
          if (!t.is_number())
            fail("STRUCTURE_ERROR", pred["threshold"],
                 "rule '" + rule.id + "': belief threshold must be numeric");
          bp.threshold = t.get<double>();
          if (!belief_keys.count(bp.key))
            fail("UNKNOWN_BELIEF_KEY", pred,
                 "rule '" + rule.id + "': belief '" + bp.key + "' is not in the schema");
          rule.belief_predicates.push_back(std::move(bp));
        }
      } else if (key == "required_prior_outcome") {
        std::string outcome = scalar(v, "required_prior_outcome");
        if (outcome == "RECOVERY_SUCCEEDED") {
          rule.required_prior_outcome = RecoveryOutcome::RecoverySucceeded;
        } else if (outcome == "RECOVERY_FAILED") {
          rule.required_prior_outcome = RecoveryOutcome::RecoveryFailed;
        } else {
          fail("STRUCTURE_ERROR", v,
               "rule '" + rule.id +
                   "': required_prior_outcome must be RECOVERY_SUCCEEDED or RECOVERY_FAILED");
        }
      } else {
        fail("STRUCTURE_ERROR", v, "rule '" + rule.id + "': unknown match key '" + key + "'");
      }
    }
  }

  if (rule.min_consecutive_aborts < 1)
    fail("BAD_RANGE", node, "rule '" + rule.id + "': min_consecutive_aborts must be >= 1");
  if (rule.max_consecutive_aborts && *rule.max_consecutive_aborts < rule.min_consecutive_aborts)
    fail("BAD_RANGE", node,
         "rule '" + rule.id + "': min_consecutive_aborts exceeds max_consecutive_aborts");

  if (node["recovery"]) {
    const YAML::Node& recovery = node["recovery"];
    if (!recovery.IsMap() || !recovery["task"])
      fail("STRUCTURE_ERROR", recovery, "rule '" + rule.id + "': recovery needs a task name");
    for (const auto& item : recovery) {
      std::string key = item.first.as<std::string>();
      if (key != "task" && key != "params")
        fail("STRUCTURE_ERROR", item.second,
             "rule '" + rule.id + "': unknown recovery key '" + key + "'");
    }
    rule.recovery_task = scalar(recovery["task"], "recovery task");
    const dsl::TaskDefinition* def = recovery_lib.find(rule.recovery_task);
    if (!def)
      fail("UNKNOWN_RECOVERY_TASK", recovery["task"],
           "rule '" + rule.id + "': no recovery task named '" + rule.recovery_task + "'");
    if (recovery["params"]) {
      if (!recovery["params"].IsMap())
        fail("STRUCTURE_ERROR", recovery["params"],
             "rule '" + rule.id + "': recovery params must be a map");
      for (const auto& item : recovery["params"]) {
        std::string name = item.first.as<std::string>();
        RecoveryParam source = parse_param_source(item.second, rule.id);
        if (source.kind == RecoveryParam::Kind::BeliefRef && !belief_keys.count(source.key))
          fail("UNKNOWN_BELIEF_KEY", item.second,
               "rule '" + rule.id + "': belief '" + source.key + "' is not in the schema");
        rule.recovery_params.emplace_back(std::move(name), std::move(source));
      }
    }
    // Params must cover the recovery task's declared params exactly.
    for (const auto& p : def->params) {
      if (std::none_of(rule.recovery_params.begin(), rule.recovery_params.end(),
                       [&](const auto& rp) { return rp.first == p; }))
        fail("STRUCTURE_ERROR", recovery,
             "rule '" + rule.id + "': recovery task needs param '" + p + "'");
    }
    for (const auto& [name, source] : rule.recovery_params) {
      (void)source;
      if (std::find(def->params.begin(), def->params.end(), name) == def->params.end())
        fail("STRUCTURE_ERROR", recovery,
             "rule '" + rule.id + "': recovery task takes no param '" + name + "'");
    }
  }

  bool fixed = node["resumption"].IsDefined();
  bool on_success = node["on_recovery_success"].IsDefined();
  bool on_failure = node["on_recovery_failure"].IsDefined();
  if (on_success != on_failure)
    fail("STRUCTURE_ERROR", node,
         "rule '" + rule.id + "': on_recovery_success and on_recovery_failure come as a pair");
  if (fixed == on_success)
    fail("STRUCTURE_ERROR", node,
         "rule '" + rule.id + "': exactly one of resumption or the on_recovery_* pair");
  if (on_success && rule.recovery_task.empty())
    fail("STRUCTURE_ERROR", node,
         "rule '" + rule.id + "': outcome-dependent resumption needs a recovery task");

  if (fixed) {
    rule.resumption = parse_resumption_node(node["resumption"], rule.id);
    check_target_in_suffix(rule, *rule.resumption, node["resumption"]);
  } else {
    rule.on_recovery_success = parse_resumption_node(node["on_recovery_success"], rule.id);
    rule.on_recovery_failure = parse_resumption_node(node["on_recovery_failure"], rule.id);
    check_target_in_suffix(rule, *rule.on_recovery_success, node["on_recovery_success"]);
    check_target_in_suffix(rule, *rule.on_recovery_failure, node["on_recovery_failure"]);
  }
  return rule;
}

void emit_value(YAML::Emitter& out, const Value& v) {
  switch (v.type()) {
    case Value::value_t::string:
      out << YAML::DoubleQuoted << v.get<std::string>();
      break;
    case Value::value_t::array:
      out << YAML::BeginSeq;
      for (const auto& item : v) emit_value(out, item);
      out << YAML::EndSeq;
      break;
    case Value::value_t::object:
      out << YAML::BeginMap;
      for (const auto& [key, item] : v.items()) {
        out << YAML::Key << key << YAML::Value;
        emit_value(out, item);
      }
      out << YAML::EndMap;
      break;
    default:
      out << v.dump();
      break;
  }
}

void emit_resumption(YAML::Emitter& out, const char* key, const RuleResumption& resumption) {
  out << YAML::Key << key << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "strategy" << YAML::Value
      << exec::resumption_strategy_name(resumption.strategy);
  if (!resumption.target_level.empty())
    out << YAML::Key << "target_level" << YAML::Value << resumption.target_level;
  out << YAML::EndMap;
}

}  // namespace

RuleSet load_rules(const std::string& text, const dsl::TaskLibrary& recovery_lib,
                   const std::set<std::string>& belief_keys) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }
  RuleSet out;
  if (doc.IsNull() || !doc.IsDefined()) return out;
  if (!doc.IsSequence())
    throw LoadError("STRUCTURE_ERROR", "rule document must be a list of rules");
  std::set<std::string> ids;
  for (const auto& node : doc) {
    RecoveryRule rule = parse_rule(node, recovery_lib, belief_keys);
    if (!ids.insert(rule.id).second)
      fail("STRUCTURE_ERROR", node, "duplicate rule id '" + rule.id + "'");
    out.rules.push_back(std::move(rule));
  }
  return out;
}

RuleSet load_rules_file(const std::string& path, const dsl::TaskLibrary& recovery_lib,
                        const std::set<std::string>& belief_keys) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_rules(buf.str(), recovery_lib, belief_keys);
}

std::string serialize_rules(const RuleSet& rules) {
  YAML::Emitter out;
  out << YAML::BeginSeq;
  for (const auto& rule : rules.rules) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << rule.id;

    out << YAML::Key << "match" << YAML::Value << YAML::BeginMap;
    if (!rule.task_path_suffix.empty()) {
      out << YAML::Key << "task_path_suffix" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& name : rule.task_path_suffix) out << name;
      out << YAML::EndSeq;
    }
    if (rule.action_name) out << YAML::Key << "action_name" << YAML::Value << *rule.action_name;
    if (rule.error_signal_pattern)
      out << YAML::Key << "error_signal" << YAML::Value << *rule.error_signal_pattern;
    if (rule.explicit_abort_bounds) {
      out << YAML::Key << "min_consecutive_aborts" << YAML::Value
          << rule.min_consecutive_aborts;
      if (rule.max_consecutive_aborts)
        out << YAML::Key << "max_consecutive_aborts" << YAML::Value
            << *rule.max_consecutive_aborts;
    }
    if (!rule.belief_predicates.empty()) {
      out << YAML::Key << "beliefs" << YAML::Value << YAML::BeginSeq;
      for (const auto& bp : rule.belief_predicates) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "key" << YAML::Value << bp.key;
        out << YAML::Key << "op" << YAML::Value << (bp.less_than ? "<" : ">=");
        out << YAML::Key << "threshold" << YAML::Value << bp.threshold;
        out << YAML::EndMap;
      }
      out << YAML::EndSeq;
    }
    if (rule.required_prior_outcome)
      out << YAML::Key << "required_prior_outcome" << YAML::Value
          << recovery_outcome_name(*rule.required_prior_outcome);
    out << YAML::EndMap;

    if (!rule.recovery_task.empty()) {
      out << YAML::Key << "recovery" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "task" << YAML::Value << rule.recovery_task;
      if (!rule.recovery_params.empty()) {
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        for (const auto& [name, source] : rule.recovery_params) {
          out << YAML::Key << name << YAML::Value;
          switch (source.kind) {
            case RecoveryParam::Kind::Literal:
              if (source.literal.is_object() && source.literal.contains("from")) {
                out << YAML::Flow << YAML::BeginMap;
                out << YAML::Key << "from" << YAML::Value << "literal";
                out << YAML::Key << "value" << YAML::Value;
                emit_value(out, source.literal);
                out << YAML::EndMap;
              } else {
                emit_value(out, source.literal);
              }
              break;
            case RecoveryParam::Kind::BeliefRef:
              out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value
                  << "belief" << YAML::Key << "key" << YAML::Value << source.key
                  << YAML::EndMap;
              break;
            case RecoveryParam::Kind::ContextField:
              out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value
                  << "context" << YAML::Key << "key" << YAML::Value << source.key
                  << YAML::EndMap;
              break;
            case RecoveryParam::Kind::DbRef:
              out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << "db"
                  << YAML::Key << "key" << YAML::Value << source.key << YAML::EndMap;
              break;
          }
        }
        out << YAML::EndMap;
      }
      out << YAML::EndMap;
    }

    if (rule.resumption) {
      emit_resumption(out, "resumption", *rule.resumption);
    } else {
      emit_resumption(out, "on_recovery_success", *rule.on_recovery_success);
      emit_resumption(out, "on_recovery_failure", *rule.on_recovery_failure);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  return std::string(out.c_str()) + "\n";
}

}  // namespace rtask::monitor
