#include "rtask/value.hpp"

#include <charconv>
#include <cstdlib>

#include <yaml-cpp/yaml.h>

namespace rtask {

namespace {

bool parse_integer(const std::string& text, long long& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  char* end = nullptr;
  out = std::strtod(text.c_str(), &end);
  return end == text.c_str() + text.size();
}

}  // namespace

Value yaml_scalar_to_value(const std::string& text, bool quoted) {
  if (quoted) return Value(text);
  if (text.empty() || text == "null" || text == "~") return Value(nullptr);
  if (text == "true") return Value(true);
  if (text == "false") return Value(false);
  long long i = 0;
  if (parse_integer(text, i)) return Value(i);
  double d = 0.0;
  if (parse_double(text, d)) return Value(d);
  return Value(text);
}

Value yaml_to_value(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return Value(nullptr);
    case YAML::NodeType::Scalar:
      return yaml_scalar_to_value(node.Scalar(), node.Tag() == "!");
    case YAML::NodeType::Sequence: {
      Value out = Value::array();
      for (const auto& item : node) out.push_back(yaml_to_value(item));
      return out;
    }
    case YAML::NodeType::Map: {
      Value out = Value::object();
      for (const auto& kv : node) out[kv.first.Scalar()] = yaml_to_value(kv.second);
      return out;
    }
  }
  return Value(nullptr);
}

std::string value_kind_name(const Value& v) {
  if (v.is_null()) return "null";
  if (v.is_boolean()) return "bool";
  if (v.is_number_integer()) return "int";
  if (v.is_number_float()) return "float";
  if (v.is_string()) return "string";
  if (v.is_array()) return "list";
  return "object";
}

}  // namespace rtask
