// Simulated kit-assembly world: stations, gripper, kit slots, and the
// object-conservation invariant.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "rtask/knowledge/beliefs.hpp"
#include "rtask/knowledge/database.hpp"
#include "rtask/value.hpp"

namespace rtask::sim {

struct WorldState {
  std::string robot_at;  // waypoint or station name
  std::string holding;   // object id; empty = gripper EMPTY
  std::map<std::string, std::multiset<std::string>> stations;
  std::map<std::string, std::string> kit;         // slot -> object id or ""
  std::map<std::string, std::string> slot_types;  // slot -> required object type
  std::map<std::string, std::string> object_types;

  // Station whose container currently holds `object`, if any.
  std::optional<std::string> station_of(const std::string& object) const;
  // First empty slot accepting `type`, in slot-name order.
  std::optional<std::string> empty_slot_for(const std::string& type) const;
  bool kit_complete() const;

  // Every known object id sits in exactly one place: a station container,
  // the gripper, or a kit slot.
  bool conservation_holds() const;

  Value to_json() const;
};

struct ScenarioBundle {
  WorldState world;
  // Present when the scenario document embeds database:/beliefs: sections.
  std::optional<knowledge::Database> db;
  std::optional<knowledge::BeliefState> beliefs;
};

// Throws LoadError SYNTAX_ERROR, STRUCTURE_ERROR, DUPLICATE_OBJECT.
ScenarioBundle build_world(const std::string& text);
ScenarioBundle build_world_file(const std::string& path);

}  // namespace rtask::sim
