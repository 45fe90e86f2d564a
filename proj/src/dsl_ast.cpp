#include "rtask/dsl/ast.hpp"

namespace rtask::dsl {

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Action: return "action";
    case StepKind::Task: return "task";
    case StepKind::Op: return "op";
    case StepKind::Choice: return "choice";
    case StepKind::Loop: return "loop";
  }
  return "action";
}

const char* compare_op_name(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "==";
}

const char* bool_op_name(BoolOpKind op) {
  switch (op) {
    case BoolOpKind::And: return "and";
    case BoolOpKind::Or: return "or";
    case BoolOpKind::Not: return "not";
  }
  return "and";
}

bool Expression::operator==(const Expression& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case ExprKind::Literal: return literal == other.literal;
    case ExprKind::ParamRef:
    case ExprKind::VarRef:
    case ExprKind::DbRef: return name == other.name;
    case ExprKind::Compare: return cmp == other.cmp && operands == other.operands;
    case ExprKind::BoolOp: return bop == other.bop && operands == other.operands;
    case ExprKind::Exists: return operands == other.operands;
  }
  return false;
}

Expression Expression::make_literal(Value v) {
  Expression e;
  e.kind = ExprKind::Literal;
  e.literal = std::move(v);
  return e;
}

Expression Expression::make_param_ref(std::string name) {
  Expression e;
  e.kind = ExprKind::ParamRef;
  e.name = std::move(name);
  return e;
}

Expression Expression::make_var_ref(std::string name) {
  Expression e;
  e.kind = ExprKind::VarRef;
  e.name = std::move(name);
  return e;
}

Expression Expression::make_db_ref(std::string key) {
  Expression e;
  e.kind = ExprKind::DbRef;
  e.name = std::move(key);
  return e;
}

Expression Expression::make_compare(CompareOp op, Expression lhs, Expression rhs) {
  Expression e;
  e.kind = ExprKind::Compare;
  e.cmp = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expression Expression::make_bool(BoolOpKind op, std::vector<Expression> operands) {
  Expression e;
  e.kind = ExprKind::BoolOp;
  e.bop = op;
  e.operands = std::move(operands);
  return e;
}

Expression Expression::make_exists(Expression ref) {
  Expression e;
  e.kind = ExprKind::Exists;
  e.operands.push_back(std::move(ref));
  return e;
}

namespace {

// Precedence for deciding parentheses: or < and < not < compare < primary.
int precedence(const Expression& e) {
  switch (e.kind) {
    case ExprKind::BoolOp:
      if (e.bop == BoolOpKind::Or) return 0;
      if (e.bop == BoolOpKind::And) return 1;
      return 2;
    case ExprKind::Compare: return 3;
    default: return 4;
  }
}

void render(const Expression& e, int parent_prec, std::string& out) {
  bool parens = precedence(e) < parent_prec;
  if (parens) out += "(";
  switch (e.kind) {
    case ExprKind::Literal:
      if (e.literal.is_string())
        out += "'" + e.literal.get<std::string>() + "'";
      else
        out += e.literal.dump();
      break;
    case ExprKind::ParamRef: out += "params." + e.name; break;
    case ExprKind::VarRef: out += "var." + e.name; break;
    case ExprKind::DbRef: out += "db." + e.name; break;
    case ExprKind::Compare:
      render(e.operands[0], 4, out);
      out += std::string(" ") + compare_op_name(e.cmp) + " ";
      render(e.operands[1], 4, out);
      break;
    case ExprKind::BoolOp:
      if (e.bop == BoolOpKind::Not) {
        out += "not ";
        render(e.operands[0], 3, out);
      } else {
        const char* join = e.bop == BoolOpKind::And ? " and " : " or ";
        int prec = precedence(e);
        for (std::size_t i = 0; i < e.operands.size(); ++i) {
          if (i) out += join;
          render(e.operands[i], prec + 1, out);
        }
      }
      break;
    case ExprKind::Exists:
      out += "exists(";
      render(e.operands[0], 0, out);
      out += ")";
      break;
  }
  if (parens) out += ")";
}

}  // namespace

std::string expression_to_string(const Expression& expr) {
  std::string out;
  render(expr, 0, out);
  return out;
}

bool Step::operator==(const Step& other) const {
  return name == other.name && kind == other.kind && target == other.target &&
         params == other.params && var == other.var && condition == other.condition &&
         if_true == other.if_true && if_false == other.if_false && body == other.body;
}

}  // namespace rtask::dsl
