#pragma once

#include <string>

#include "rtask/dsl/ast.hpp"

namespace rtask::dsl {

// Emits a library as recipe YAML. parse_recipe(serialize_library(lib)) yields
// a library with identical structure.
std::string serialize_library(const TaskLibrary& lib);

std::string serialize_task(const TaskDefinition& task);

}  // namespace rtask::dsl
