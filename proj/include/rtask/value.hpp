// Runtime value model shared by recipes, the database, traces, and reports.
#pragma once

#include <string>

#include "json.hpp"

namespace YAML {
class Node;
}

namespace rtask {

// All values flowing through params, vars, database entries, and traces are
// JSON-shaped. Object keys are kept sorted, which makes every serialization
// deterministic.
using Value = nlohmann::json;

// Converts a parsed YAML node into a Value. Plain scalars are typed by probing
// null/bool/integer/float in that order; quoted scalars stay strings.
Value yaml_to_value(const YAML::Node& node);

// Scalar typing rule for a single YAML scalar, honoring the quoted flag.
Value yaml_scalar_to_value(const std::string& text, bool quoted);

// Short kind name for error messages: "null", "bool", "int", "float",
// "string", "list", "object".
std::string value_kind_name(const Value& v);

}  // namespace rtask
