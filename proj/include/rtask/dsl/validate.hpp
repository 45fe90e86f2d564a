#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rtask/diagnostics.hpp"
#include "rtask/dsl/ast.hpp"
#include "rtask/value.hpp"

namespace rtask::dsl {

// Names and arities the recipes are checked against. Kept as plain data so
// validation does not depend on the executor.
struct UnitSignature {
  std::set<std::string> required_params;
  std::set<std::string> optional_params;
  // Outputs the unit can bind, in declaration order. A step may capture at
  // most this many vars.
  std::vector<std::string> outputs;
  // Ops take positional args: param names are ignored, only the count is
  // checked against [min_args, max_args].
  bool positional = false;
  std::size_t min_args = 0;
  std::size_t max_args = 0;
};

struct ValidationContext {
  std::map<std::string, UnitSignature> actions;
  std::map<std::string, UnitSignature> ops;
  std::set<std::string> db_keys;
  // When false, db.* references are not checked (no database supplied).
  bool check_db_keys = true;
};

// Checks a library and returns all findings (no fail-fast), sorted with
// sort_diagnostics. Error codes:
//   UNKNOWN_TARGET   step target is no known task/action/op
//   ARITY_MISMATCH   params or var lists do not fit the target
//   USE_BEFORE_DEF   var.x read before any step could have bound it
//   UNDECLARED_VAR   step captures into a var the task never declares
//   UNKNOWN_PARAM    params.x is not a declared parameter
//   RECURSIVE_TASK   task invocation cycle
//   UNKNOWN_DB_KEY   db.k not in the database
//   DUPLICATE_STEP   step name reused within one step list
//   UNREACHABLE_STEP branch or body a literal condition rules out (warning)
// Marks lib.validated when no errors remain.
std::vector<Diagnostic> validate(TaskLibrary& lib, const ValidationContext& ctx);

// Static expansion of the hierarchy under `root`. TASK steps recurse into
// the target's tree; CHOICE and LOOP markers keep their branches/body
// beneath them, with both choice branches present. `ordinal` numbers the
// nodes sharing one target name in depth-first order (1-based).
struct ExpandedNode {
  std::string name;
  StepKind kind = StepKind::Task;
  std::string target;
  std::size_t ordinal = 1;
  std::string branch;  // "T"/"F" under a choice marker, "B" under a loop
  std::vector<ExpandedNode> children;
};

// `static_bindings` supplies values for the root task's params; it does not
// change the tree shape. Throws LoadError UNKNOWN_ROOT if the root task is
// missing; requires a validated library (cycles would not terminate).
ExpandedNode expand_tree(const TaskLibrary& lib, const std::string& root_task,
                         const Value& static_bindings = Value::object());

std::size_t count_nodes(const ExpandedNode& node);

// DOT text rendering of an expanded tree, one node per step, choice and loop
// markers labelled C and L, branch membership on the edges.
std::string expand_tree_to_dot(const ExpandedNode& root);

}  // namespace rtask::dsl
