#pragma once

#include <map>
#include <string>

#include "rtask/dsl/ast.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/knowledge/database.hpp"
#include "rtask/value.hpp"

namespace rtask::exec {

struct Scope {
  const Value* params = nullptr;                       // object
  const std::map<std::string, Value>* vars = nullptr;  // locals
  const knowledge::Database* db = nullptr;
};

// Pure evaluation. Comparisons require both sides to share a JSON kind
// (numbers compare across int/double). Throws LoadError UNBOUND_REFERENCE
// for unresolvable params./var./db. references and TYPE_ERROR for
// incompatible comparisons or non-boolean operands to and/or/not.
Value evaluate(const dsl::Expression& expr, const Scope& scope);

bool evaluate_condition(const dsl::Expression& expr, const Scope& scope);

}  // namespace rtask::exec
