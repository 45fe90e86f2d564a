// Grounding database: immutable dotted-key store for waypoints, poses,
// object specs, and scalar limits.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rtask/value.hpp"

namespace rtask::knowledge {

enum class ValueKind { Scalar, Pose, Waypoint, Object, List };

const char* value_kind_label(ValueKind kind);

struct TypedValue {
  ValueKind kind = ValueKind::Scalar;
  // Scalar: the value itself. Pose: {x,y,yaw} or {x,y,z,yaw} or
  // {x,y,z,qx,qy,qz,qw}. Waypoint: pose fields plus "name". Object: "name"
  // plus numeric dimension fields in meters. List: unused (see items).
  Value data;
  std::vector<TypedValue> items;

  bool operator==(const TypedValue& other) const;
  Value to_value() const;
};

class Database {
 public:
  Database() = default;

  // Resolves `key` as a stored entry, or descends into an entry's fields
  // when `key` extends an entry key (objects.large_gear.length). Throws
  // LoadError UNKNOWN_KEY when nothing resolves.
  TypedValue get(const std::string& key) const;

  bool has(const std::string& key) const;
  std::set<std::string> keys() const;
  bool empty() const { return entries_.empty(); }

 private:
  friend Database load_database(const std::string&);
  std::map<std::string, TypedValue> entries_;
};

// Entry values declare their kind with a single wrapper key (`pose:`,
// `waypoint:`, `object:`, `list:`); bare scalars are Scalar entries; nested
// plain maps extend the dotted namespace. Throws LoadError SYNTAX_ERROR or
// TYPE_ERROR.
Database load_database(const std::string& text);
Database load_database_file(const std::string& path);

}  // namespace rtask::knowledge
