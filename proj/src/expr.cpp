#include "rtask/exec/expr.hpp"

#include "rtask/errors.hpp"

namespace rtask::exec {

namespace {

bool numbers(const Value& a, const Value& b) { return a.is_number() && b.is_number(); }

bool same_kind(const Value& a, const Value& b) {
  if (numbers(a, b)) return true;
  return a.type() == b.type();
}

int compare_values(const Value& a, const Value& b, const dsl::Expression& expr) {
  if (!same_kind(a, b))
    throw LoadError("TYPE_ERROR", "cannot compare " + std::string(value_kind_name(a)) +
                                      " with " + value_kind_name(b) + " in '" +
                                      dsl::expression_to_string(expr) + "'");
  if (numbers(a, b)) {
    double x = a.get<double>(), y = b.get<double>();
    return x < y ? -1 : x > y ? 1 : 0;
  }
  if (a == b) return 0;
  return a < b ? -1 : 1;
}

bool ordered_kind(const Value& a, const Value& b) {
  return numbers(a, b) || (a.is_string() && b.is_string());
}

bool resolvable(const dsl::Expression& expr, const Scope& scope) {
  switch (expr.kind) {
    case dsl::ExprKind::ParamRef:
      return scope.params && scope.params->contains(expr.name) &&
             !(*scope.params)[expr.name].is_null();
    case dsl::ExprKind::VarRef:
      return scope.vars && scope.vars->count(expr.name);
    case dsl::ExprKind::DbRef:
      return scope.db && scope.db->has(expr.name);
    default:
      return true;
  }
}

}  // namespace

Value evaluate(const dsl::Expression& expr, const Scope& scope) {
  switch (expr.kind) {
    case dsl::ExprKind::Literal:
      return expr.literal;
    case dsl::ExprKind::ParamRef: {
      if (!scope.params || !scope.params->contains(expr.name))
        throw LoadError("UNBOUND_REFERENCE", "params." + expr.name + " is not bound");
      return (*scope.params)[expr.name];
    }
    case dsl::ExprKind::VarRef: {
      if (!scope.vars) throw LoadError("UNBOUND_REFERENCE", "var." + expr.name + " is not bound");
      auto it = scope.vars->find(expr.name);
      if (it == scope.vars->end())
        throw LoadError("UNBOUND_REFERENCE", "var." + expr.name + " is not bound");
      return it->second;
    }
    case dsl::ExprKind::DbRef: {
      if (!scope.db) throw LoadError("UNBOUND_REFERENCE", "db." + expr.name + ": no database");
      try {
        return scope.db->get(expr.name).to_value();
      } catch (const LoadError&) {
        throw LoadError("UNBOUND_REFERENCE", "db." + expr.name + " is not in the database");
      }
    }
    case dsl::ExprKind::Exists:
      return resolvable(expr.operands[0], scope);
    case dsl::ExprKind::Compare: {
      Value lhs = evaluate(expr.operands[0], scope);
      Value rhs = evaluate(expr.operands[1], scope);
      switch (expr.cmp) {
        case dsl::CompareOp::Eq:
          if (!same_kind(lhs, rhs)) return false;
          return compare_values(lhs, rhs, expr) == 0;
        case dsl::CompareOp::Ne:
          if (!same_kind(lhs, rhs)) return true;
          return compare_values(lhs, rhs, expr) != 0;
        case dsl::CompareOp::Lt:
        case dsl::CompareOp::Le:
        case dsl::CompareOp::Gt:
        case dsl::CompareOp::Ge: {
          if (!ordered_kind(lhs, rhs))
            throw LoadError("TYPE_ERROR",
                            "ordered comparison needs two numbers or two strings in '" +
                                dsl::expression_to_string(expr) + "'");
          int c = compare_values(lhs, rhs, expr);
          switch (expr.cmp) {
            case dsl::CompareOp::Lt: return c < 0;
            case dsl::CompareOp::Le: return c <= 0;
            case dsl::CompareOp::Gt: return c > 0;
            default: return c >= 0;
          }
        }
      }
      return false;
    }
    case dsl::ExprKind::BoolOp: {
      if (expr.bop == dsl::BoolOpKind::Not) {
        Value v = evaluate(expr.operands[0], scope);
        if (!v.is_boolean())
          throw LoadError("TYPE_ERROR", "'not' needs a boolean, got " +
                                            std::string(value_kind_name(v)));
        return !v.get<bool>();
      }
      bool is_and = expr.bop == dsl::BoolOpKind::And;
      for (const auto& operand : expr.operands) {
        Value v = evaluate(operand, scope);
        if (!v.is_boolean())
          throw LoadError("TYPE_ERROR", std::string(is_and ? "'and'" : "'or'") +
                                            " needs booleans, got " + value_kind_name(v));
        if (is_and && !v.get<bool>()) return false;
        if (!is_and && v.get<bool>()) return true;
      }
      return is_and;
    }
  }
  throw LoadError("TYPE_ERROR", "unevaluable expression");
}

bool evaluate_condition(const dsl::Expression& expr, const Scope& scope) {
  Value v = evaluate(expr, scope);
  if (!v.is_boolean())
    throw LoadError("TYPE_ERROR", "condition '" + dsl::expression_to_string(expr) +
                                      "' evaluated to " + value_kind_name(v) +
                                      ", needs a boolean");
  return v.get<bool>();
}

}  // namespace rtask::exec
