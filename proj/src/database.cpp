#include "rtask/knowledge/database.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"

namespace rtask::knowledge {

const char* value_kind_label(ValueKind kind) {
  switch (kind) {
    case ValueKind::Scalar: return "scalar";
    case ValueKind::Pose: return "pose";
    case ValueKind::Waypoint: return "waypoint";
    case ValueKind::Object: return "object";
    case ValueKind::List: return "list";
  }
  return "?";
}

bool TypedValue::operator==(const TypedValue& other) const {
  return kind == other.kind && data == other.data && items == other.items;
}

Value TypedValue::to_value() const {
  if (kind != ValueKind::List) return data;
  Value out = Value::array();
  for (const auto& item : items) out.push_back(item.to_value());
  return out;
}

TypedValue Database::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it != entries_.end()) return it->second;

  // Longest stored prefix wins, then descend through the value's fields.
  for (auto rit = entries_.rbegin(); rit != entries_.rend(); ++rit) {
    const std::string& entry = rit->first;
    if (key.size() <= entry.size() || key.compare(0, entry.size(), entry) != 0 ||
        key[entry.size()] != '.')
      continue;
    Value cursor = rit->second.data;
    std::size_t pos = entry.size() + 1;
    while (pos <= key.size()) {
      std::size_t dot = key.find('.', pos);
      std::string field = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (!cursor.is_object() || !cursor.contains(field))
        throw LoadError("UNKNOWN_KEY", "'" + key + "': no field '" + field + "' in '" +
                                           entry + "'");
      cursor = cursor[field];
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    TypedValue out;
    out.kind = ValueKind::Scalar;
    out.data = cursor;
    return out;
  }
  throw LoadError("UNKNOWN_KEY", "'" + key + "' is not in the database");
}

bool Database::has(const std::string& key) const {
  if (entries_.count(key)) return true;
  try {
    get(key);
    return true;
  } catch (const LoadError&) {
    return false;
  }
}

std::set<std::string> Database::keys() const {
  std::set<std::string> out;
  for (const auto& [key, value] : entries_) {
    (void)value;
    out.insert(key);
  }
  return out;
}

namespace {

[[noreturn]] void fail(const char* code, const YAML::Node& node, const std::string& message) {
  throw LoadError(code, message, node.Mark().line, node.Mark().column);
}

double numeric_field(const YAML::Node& node, const std::string& field, const char* kind) {
  Value v = yaml_to_value(node);
  if (!v.is_number())
    fail("TYPE_ERROR", node, std::string(kind) + " field '" + field + "' must be numeric");
  return v.get<double>();
}

TypedValue parse_pose(const YAML::Node& node, bool waypoint, const std::string& key) {
  const char* kind = waypoint ? "waypoint" : "pose";
  if (!node.IsMap()) fail("TYPE_ERROR", node, std::string(kind) + " '" + key + "' must be a map");

  TypedValue out;
  out.kind = waypoint ? ValueKind::Waypoint : ValueKind::Pose;
  out.data = Value::object();
  std::set<std::string> fields;
  for (const auto& item : node) {
    std::string field = item.first.as<std::string>();
    fields.insert(field);
    if (waypoint && field == "name") {
      Value v = yaml_to_value(item.second);
      if (!v.is_string()) fail("TYPE_ERROR", item.second, "waypoint name must be a string");
      out.data[field] = v;
    } else {
      out.data[field] = numeric_field(item.second, field, kind);
    }
  }

  auto has_all = [&](std::initializer_list<const char*> wanted) {
    for (const char* f : wanted)
      if (!fields.count(f)) return false;
    return true;
  };
  std::size_t numeric = fields.size() - (waypoint && fields.count("name") ? 1 : 0);
  bool planar = has_all({"x", "y", "yaw"}) && numeric == 3;
  bool spatial = has_all({"x", "y", "z", "yaw"}) && numeric == 4;
  bool quat = has_all({"x", "y", "z", "qx", "qy", "qz", "qw"}) && numeric == 7;
  if (!planar && !spatial && !quat)
    fail("TYPE_ERROR", node,
         std::string(kind) + " '" + key + "' needs fields x,y,yaw or x,y,z,yaw or x,y,z,qx,qy,qz,qw");
  if (waypoint && !fields.count("name"))
    out.data["name"] = key.substr(key.rfind('.') + 1);
  return out;
}

TypedValue parse_object(const YAML::Node& node, const std::string& key) {
  if (!node.IsMap()) fail("TYPE_ERROR", node, "object '" + key + "' must be a map");
  TypedValue out;
  out.kind = ValueKind::Object;
  out.data = Value::object();
  for (const auto& item : node) {
    std::string field = item.first.as<std::string>();
    if (field == "name") {
      Value v = yaml_to_value(item.second);
      if (!v.is_string()) fail("TYPE_ERROR", item.second, "object name must be a string");
      out.data[field] = v;
    } else {
      out.data[field] = numeric_field(item.second, field, "object");
    }
  }
  if (!out.data.contains("name")) out.data["name"] = key.substr(key.rfind('.') + 1);
  return out;
}

TypedValue parse_entry_value(const YAML::Node& node, const std::string& key);

TypedValue parse_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail("TYPE_ERROR", node, "list '" + key + "' must be a sequence");
  TypedValue out;
  out.kind = ValueKind::List;
  for (const auto& item : node) out.items.push_back(parse_entry_value(item, key));
  return out;
}

bool is_wrapper(const YAML::Node& node, std::string& kind, YAML::Node& inner) {
  if (!node.IsMap() || node.size() != 1) return false;
  auto item = node.begin();
  std::string k = item->first.as<std::string>();
  if (k != "pose" && k != "waypoint" && k != "object" && k != "list") return false;
  kind = k;
  inner = item->second;
  return true;
}

TypedValue parse_entry_value(const YAML::Node& node, const std::string& key) {
  std::string kind;
  YAML::Node inner;
  if (is_wrapper(node, kind, inner)) {
    if (kind == "pose") return parse_pose(inner, false, key);
    if (kind == "waypoint") return parse_pose(inner, true, key);
    if (kind == "object") return parse_object(inner, key);
    return parse_list(inner, key);
  }
  if (node.IsScalar() || node.IsNull()) {
    TypedValue out;
    out.kind = ValueKind::Scalar;
    out.data = yaml_to_value(node);
    return out;
  }
  fail("TYPE_ERROR", node, "entry '" + key + "' must be a scalar or a typed wrapper");
}

void load_namespace(const YAML::Node& node, const std::string& prefix,
                    std::map<std::string, TypedValue>& entries) {
  if (!node.IsMap()) fail("TYPE_ERROR", node, "database namespaces must be maps");
  for (const auto& item : node) {
    std::string key = prefix.empty() ? item.first.as<std::string>()
                                     : prefix + "." + item.first.as<std::string>();
    std::string kind;
    YAML::Node inner;
    if (is_wrapper(item.second, kind, inner) || item.second.IsScalar() ||
        item.second.IsNull() || item.second.IsSequence()) {
      if (item.second.IsSequence()) {
        entries[key] = parse_list(item.second, key);
      } else {
        entries[key] = parse_entry_value(item.second, key);
      }
    } else {
      load_namespace(item.second, key, entries);
    }
  }
}

}  // namespace

Database load_database(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }
  Database db;
  if (doc.IsNull() || !doc.IsDefined()) return db;
  if (!doc.IsMap()) throw LoadError("SYNTAX_ERROR", "database document must be a map");
  load_namespace(doc, "", db.entries_);
  return db;
}

Database load_database_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_database(buf.str());
}

}  // namespace rtask::knowledge
