#pragma once

#include <string>
#include <vector>

namespace rtask {

enum class Severity { Error, Warning };

// One finding from recipe validation. step_path is a /-joined chain of step
// names from the task root, e.g. "approach/grasp"; empty when the finding is
// about the task as a whole.
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string task;
  std::string step_path;

  bool operator==(const Diagnostic& other) const = default;
};

bool has_errors(const std::vector<Diagnostic>& diags);

// Stable report order: task name, then step path, then code.
void sort_diagnostics(std::vector<Diagnostic>& diags);

std::string format_diagnostic(const Diagnostic& diag);

}  // namespace rtask
