// Recipe AST: tasks, steps, and the expression grammar used by choice/loop
// conditions and step params.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtask/value.hpp"

namespace rtask::dsl {

enum class StepKind { Action, Task, Op, Choice, Loop };

const char* step_kind_name(StepKind kind);

enum class ExprKind { Literal, ParamRef, VarRef, DbRef, Compare, BoolOp, Exists };

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class BoolOpKind { And, Or, Not };

const char* compare_op_name(CompareOp op);
const char* bool_op_name(BoolOpKind op);

struct Expression {
  ExprKind kind = ExprKind::Literal;
  Value literal;               // Literal
  std::string name;            // ParamRef/VarRef: variable name; DbRef: database key
  CompareOp cmp = CompareOp::Eq;
  BoolOpKind bop = BoolOpKind::And;
  std::vector<Expression> operands;  // Compare: [lhs, rhs]; BoolOp: operands; Exists: [ref]

  bool operator==(const Expression& other) const;

  static Expression make_literal(Value v);
  static Expression make_param_ref(std::string name);
  static Expression make_var_ref(std::string name);
  static Expression make_db_ref(std::string key);
  static Expression make_compare(CompareOp op, Expression lhs, Expression rhs);
  static Expression make_bool(BoolOpKind op, std::vector<Expression> operands);
  static Expression make_exists(Expression ref);
};

// Renders an expression in the condition grammar (parse_condition inverse).
std::string expression_to_string(const Expression& expr);

struct Step {
  std::string name;
  StepKind kind = StepKind::Action;
  std::string target;  // action/task/op name; empty for choice/loop
  std::vector<std::pair<std::string, Expression>> params;  // document order
  std::vector<std::string> var;
  std::optional<Expression> condition;  // choice/loop
  std::vector<Step> if_true;            // choice
  std::vector<Step> if_false;           // choice
  std::vector<Step> body;               // loop

  bool operator==(const Step& other) const;
};

struct TaskDefinition {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> vars;  // declared outputs/locals
  std::vector<Step> steps;

  bool operator==(const TaskDefinition& other) const = default;
};

struct TaskLibrary {
  std::map<std::string, TaskDefinition> definitions;
  bool validated = false;

  bool has(const std::string& name) const { return definitions.count(name) != 0; }
  const TaskDefinition* find(const std::string& name) const {
    auto it = definitions.find(name);
    return it == definitions.end() ? nullptr : &it->second;
  }

  // Structural equality; ignores the validated flag.
  bool same_structure(const TaskLibrary& other) const { return definitions == other.definitions; }
};

}  // namespace rtask::dsl
