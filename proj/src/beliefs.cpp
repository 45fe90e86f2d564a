#include "rtask/knowledge/beliefs.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"
#include "rtask/value.hpp"

namespace rtask::knowledge {

void BeliefState::declare(const std::string& key, double initial) {
  if (initial < 0.0 || initial > 1.0)
    throw LoadError("RANGE_ERROR", "belief '" + key + "' initial value " +
                                       std::to_string(initial) + " outside [0,1]");
  beliefs_[key] = Entry{initial, 0};
  closed_ = true;
}

void BeliefState::set(const std::string& key, double value) {
  if (value < 0.0 || value > 1.0)
    throw LoadError("RANGE_ERROR", "belief '" + key + "' value " + std::to_string(value) +
                                       " outside [0,1]");
  auto it = beliefs_.find(key);
  if (it == beliefs_.end()) {
    if (closed_)
      throw LoadError("UNKNOWN_BELIEF_KEY", "belief '" + key + "' is not in the schema");
    it = beliefs_.emplace(key, Entry{}).first;
  }
  ++counter_;
  it->second.value = value;
  it->second.updated_at = counter_;
  if (on_update) on_update(key, value, counter_);
}

double BeliefState::get(const std::string& key) const {
  auto it = beliefs_.find(key);
  if (it == beliefs_.end())
    throw LoadError("UNKNOWN_BELIEF_KEY", "belief '" + key + "' is not in the schema");
  return it->second.value;
}

bool BeliefState::has(const std::string& key) const { return beliefs_.count(key) > 0; }

std::set<std::string> BeliefState::keys() const {
  std::set<std::string> out;
  for (const auto& [key, entry] : beliefs_) {
    (void)entry;
    out.insert(key);
  }
  return out;
}

BeliefSnapshot BeliefState::snapshot() const {
  BeliefSnapshot snap;
  snap.at_counter = counter_;
  for (const auto& [key, entry] : beliefs_) snap.values[key] = entry.value;
  return snap;
}

std::uint64_t BeliefState::last_updated(const std::string& key) const {
  auto it = beliefs_.find(key);
  if (it == beliefs_.end())
    throw LoadError("UNKNOWN_BELIEF_KEY", "belief '" + key + "' is not in the schema");
  return it->second.updated_at;
}

BeliefState load_belief_schema(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }
  BeliefState state;
  if (doc.IsNull() || !doc.IsDefined()) return state;
  if (!doc.IsMap())
    throw LoadError("SYNTAX_ERROR", "belief schema must be a map of key -> initial value");
  for (const auto& item : doc) {
    std::string key = item.first.as<std::string>();
    Value v = yaml_to_value(item.second);
    if (!v.is_number())
      throw LoadError("TYPE_ERROR", "belief '" + key + "' initial value must be numeric",
                      item.second.Mark().line, item.second.Mark().column);
    state.declare(key, v.get<double>());
  }
  return state;
}

BeliefState load_belief_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_belief_schema(buf.str());
}

}  // namespace rtask::knowledge
