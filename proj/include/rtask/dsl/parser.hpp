// Loads recipe files (YAML) into a TaskLibrary. Structural problems raise
// LoadError; semantic checks live in validate.hpp.
#pragma once

#include <string>
#include <vector>

#include "rtask/diagnostics.hpp"
#include "rtask/dsl/ast.hpp"

namespace rtask::dsl {

// Parses a single recipe document. Top level must be a map of task names to
// task bodies. Unknown keys inside tasks and steps are tolerated here and
// reported by the parser as warnings through `warnings` so loading can still
// fail hard on malformed structure but keep forward-compatible extras.
TaskLibrary parse_recipe(const std::string& text, std::vector<Diagnostic>* warnings = nullptr);

TaskLibrary parse_recipe_file(const std::string& path, std::vector<Diagnostic>* warnings = nullptr);

// Parses the choice/loop condition grammar:
//   or_expr   := and_expr ('or' and_expr)*
//   and_expr  := not_expr ('and' not_expr)*
//   not_expr  := 'not' not_expr | cmp
//   cmp       := primary (('=='|'!='|'<'|'<='|'>'|'>=') primary)?
//   primary   := '(' or_expr ')' | 'exists' '(' ref ')' | ref | literal
//   ref       := ('params.'|'var.'|'db.') dotted-name
// Literals are numbers, true/false/null, or quoted strings. Bare words are
// rejected so a misspelled prefix cannot silently become a string.
Expression parse_condition(const std::string& text);

// Merges `extra` into `base`. Duplicate task names raise LoadError.
void merge_libraries(TaskLibrary& base, const TaskLibrary& extra);

}  // namespace rtask::dsl
