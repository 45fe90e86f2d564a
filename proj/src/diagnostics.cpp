#include "rtask/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace rtask {

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.task, a.step_path, a.code, a.message) <
           std::tie(b.task, b.step_path, b.code, b.message);
  });
}

std::string format_diagnostic(const Diagnostic& diag) {
  std::string out = diag.severity == Severity::Error ? "error" : "warning";
  out += " [" + diag.code + "] " + diag.task;
  if (!diag.step_path.empty()) out += "/" + diag.step_path;
  out += ": " + diag.message;
  return out;
}

}  // namespace rtask
