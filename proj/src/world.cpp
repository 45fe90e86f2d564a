#include "rtask/sim/world.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"

namespace rtask::sim {

std::optional<std::string> WorldState::station_of(const std::string& object) const {
  for (const auto& [name, contents] : stations)
    if (contents.count(object)) return name;
  return std::nullopt;
}

std::optional<std::string> WorldState::empty_slot_for(const std::string& type) const {
  for (const auto& [slot, occupant] : kit) {
    if (!occupant.empty()) continue;
    auto it = slot_types.find(slot);
    if (it != slot_types.end() && it->second == type) return slot;
  }
  return std::nullopt;
}

bool WorldState::kit_complete() const {
  if (kit.empty()) return false;
  for (const auto& [slot, occupant] : kit) {
    (void)slot;
    if (occupant.empty()) return false;
  }
  return true;
}

bool WorldState::conservation_holds() const {
  std::map<std::string, int> seen;
  for (const auto& [object, type] : object_types) {
    (void)type;
    seen[object] = 0;
  }
  for (const auto& [name, contents] : stations) {
    (void)name;
    for (const auto& object : contents) {
      if (!seen.count(object)) return false;
      ++seen[object];
    }
  }
  if (!holding.empty()) {
    if (!seen.count(holding)) return false;
    ++seen[holding];
  }
  for (const auto& [slot, occupant] : kit) {
    (void)slot;
    if (occupant.empty()) continue;
    if (!seen.count(occupant)) return false;
    ++seen[occupant];
  }
  for (const auto& [object, count] : seen) {
    (void)object;
    if (count != 1) return false;
  }
  return true;
}

Value WorldState::to_json() const {
  Value out = {{"robot_at", robot_at}, {"holding", holding}, {"stations", Value::object()},
               {"kit", Value::object()}};
  for (const auto& [name, contents] : stations) {
    Value list = Value::array();
    for (const auto& object : contents) list.push_back(object);
    out["stations"][name] = std::move(list);
  }
  for (const auto& [slot, occupant] : kit) out["kit"][slot] = occupant;
  return out;
}

namespace {

[[noreturn]] void fail(const char* code, const YAML::Node& node, const std::string& message) {
  throw LoadError(code, message, node.Mark().line, node.Mark().column);
}

const std::set<std::string> kObjectTypes = {"screw",       "bolt",          "small_gear",
                                            "large_gear",  "gearbox_top",   "gearbox_bottom",
                                            "kit_caddy"};

}  // namespace

ScenarioBundle build_world(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }
  ScenarioBundle bundle;
  WorldState& world = bundle.world;
  if (doc.IsNull() || !doc.IsDefined()) return bundle;
  if (!doc.IsMap()) throw LoadError("STRUCTURE_ERROR", "scenario document must be a map");

  for (const auto& section : doc) {
    std::string key = section.first.as<std::string>();
    const YAML::Node& node = section.second;
    if (key == "robot_at") {
      if (!node.IsScalar()) fail("STRUCTURE_ERROR", node, "robot_at must be a name");
      world.robot_at = node.as<std::string>();
    } else if (key == "holding") {
      if (!node.IsScalar()) fail("STRUCTURE_ERROR", node, "holding must be an object id");
      world.holding = node.as<std::string>();
    } else if (key == "objects") {
      if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "objects must map id -> type");
      for (const auto& item : node) {
        std::string id = item.first.as<std::string>();
        if (!item.second.IsScalar())
          fail("STRUCTURE_ERROR", item.second, "object type must be a name");
        std::string type = item.second.as<std::string>();
        if (!kObjectTypes.count(type))
          fail("STRUCTURE_ERROR", item.second, "unknown object type '" + type + "'");
        if (world.object_types.count(id))
          fail("DUPLICATE_OBJECT", item.first, "object '" + id + "' declared twice");
        world.object_types[id] = type;
      }
    } else if (key == "stations") {
      if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "stations must map name -> contents");
      for (const auto& item : node) {
        std::string name = item.first.as<std::string>();
        if (!item.second.IsSequence() && !item.second.IsNull())
          fail("STRUCTURE_ERROR", item.second, "station contents must be a list");
        world.stations[name];
        if (item.second.IsSequence())
          for (const auto& object : item.second)
            world.stations[name].insert(object.as<std::string>());
      }
    } else if (key == "kit") {
      if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "kit must map slot -> type/occupant");
      for (const auto& item : node) {
        std::string slot = item.first.as<std::string>();
        if (item.second.IsScalar()) {
          world.slot_types[slot] = item.second.as<std::string>();
          world.kit[slot] = "";
        } else if (item.second.IsMap()) {
          if (!item.second["type"])
            fail("STRUCTURE_ERROR", item.second, "kit slot '" + slot + "' needs a type");
          world.slot_types[slot] = item.second["type"].as<std::string>();
          world.kit[slot] =
              item.second["holds"] ? item.second["holds"].as<std::string>() : "";
        } else {
          fail("STRUCTURE_ERROR", item.second, "kit slot '" + slot + "' must be a type name");
        }
        if (!kObjectTypes.count(world.slot_types[slot]))
          fail("STRUCTURE_ERROR", item.second,
               "unknown slot type '" + world.slot_types[slot] + "'");
      }
    } else if (key == "database") {
      YAML::Emitter emit;
      emit << node;
      bundle.db = knowledge::load_database(emit.c_str());
    } else if (key == "beliefs") {
      YAML::Emitter emit;
      emit << node;
      bundle.beliefs = knowledge::load_belief_schema(emit.c_str());
    } else {
      fail("STRUCTURE_ERROR", node, "unknown scenario section '" + key + "'");
    }
  }

  // Placement checks: every placed object is declared and placed once.
  std::map<std::string, int> placements;
  for (const auto& [name, contents] : world.stations) {
    for (const auto& object : contents) {
      if (!world.object_types.count(object))
        throw LoadError("STRUCTURE_ERROR",
                        "station '" + name + "' holds undeclared object '" + object + "'");
      ++placements[object];
    }
  }
  for (const auto& [slot, occupant] : world.kit) {
    if (occupant.empty()) continue;
    if (!world.object_types.count(occupant))
      throw LoadError("STRUCTURE_ERROR",
                      "kit slot '" + slot + "' holds undeclared object '" + occupant + "'");
    if (world.object_types.at(occupant) != world.slot_types.at(slot))
      throw LoadError("STRUCTURE_ERROR", "kit slot '" + slot + "' holds an object of type '" +
                                             world.object_types.at(occupant) +
                                             "', slot takes '" + world.slot_types.at(slot) +
                                             "'");
    ++placements[occupant];
  }
  if (!world.holding.empty()) {
    if (!world.object_types.count(world.holding))
      throw LoadError("STRUCTURE_ERROR", "gripper holds undeclared object '" + world.holding +
                                             "'");
    ++placements[world.holding];
  }
  for (const auto& [object, count] : placements)
    if (count > 1) throw LoadError("DUPLICATE_OBJECT", "object '" + object + "' placed twice");
  for (const auto& [object, type] : world.object_types) {
    (void)type;
    if (!placements.count(object))
      throw LoadError("STRUCTURE_ERROR", "object '" + object + "' is declared but not placed");
  }
  return bundle;
}

ScenarioBundle build_world_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return build_world(buf.str());
}

}  // namespace rtask::sim
