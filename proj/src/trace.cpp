#include "rtask/exec/trace.hpp"

#include <fstream>
#include <sstream>

#include "rtask/errors.hpp"

namespace rtask::exec {

Value TraceEvent::to_json() const {
  return {{"step_counter", step_counter}, {"event", event}, {"path", path},
          {"payload", payload}};
}

std::uint64_t Trace::append(std::string event, std::vector<std::string> path, Value payload) {
  TraceEvent e;
  e.step_counter = next_counter_++;
  e.event = std::move(event);
  e.path = std::move(path);
  e.payload = std::move(payload);
  events_.push_back(std::move(e));
  return events_.back().step_counter;
}

std::string Trace::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

void Trace::write_jsonl_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "' for writing");
  out << to_jsonl();
}

Trace Trace::from_jsonl(const std::string& text) {
  Trace trace;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    Value v = Value::parse(line, nullptr, false);
    if (v.is_discarded() || !v.is_object())
      throw LoadError("SYNTAX_ERROR", "trace line is not a JSON object",
                      static_cast<int>(lineno) - 1, 0);
    TraceEvent e;
    e.step_counter = v.value("step_counter", std::uint64_t{0});
    e.event = v.value("event", std::string{});
    if (v.contains("path") && v["path"].is_array())
      for (const auto& part : v["path"]) e.path.push_back(part.get<std::string>());
    e.payload = v.value("payload", Value::object());
    if (e.step_counter >= trace.next_counter_) trace.next_counter_ = e.step_counter + 1;
    trace.events_.push_back(std::move(e));
  }
  return trace;
}

}  // namespace rtask::exec
