#include "rtask/sim/mock_actions.hpp"

#include <algorithm>

namespace rtask::sim {

namespace {

const std::map<std::string, std::vector<std::string>> kInjectable = {
    {"navigate", {"LOCALIZATION_LOST", "BLOCKED"}},
    {"reposition", {"BLOCKED"}},
    {"look", {"PERCEPTION_FAILURE"}},
    {"segment", {"PERCEPTION_FAILURE"}},
    {"detect_object", {"DETECTION_FAILURE"}},
    {"detect_schunk", {"DETECTION_FAILURE"}},
    {"detect_large_object_pose", {"DETECTION_FAILURE"}},
    {"pick", {"PLANNING_FAILURE", "NO_GRASP_FOUND", "DROPPED_OBJECT"}},
    {"verify_grasp", {"SENSOR_FAULT"}},
    {"in_hand_localize", {"LOCALIZATION_TIMEOUT"}},
    {"place_in_kit", {"PLACEMENT_MISS", "DROPPED_OBJECT"}},
    {"insert_gear", {"INSERTION_MISS", "FALSE_POSITIVE_INSERT"}},
    {"move_arm", {"PLANNING_FAILURE"}},
    {"reinit_obstacle_map", {"MAP_RESET_FAILED"}},
};

using Sim = std::shared_ptr<SimContext>;

// Injected signal for this invocation, if the plan schedules or draws one.
std::optional<std::string> injected(const Sim& sim, const std::string& action,
                                    std::uint64_t ordinal) {
  return sim->plan.next_fault(action, ordinal, sim->run_seed, injectable_signals(action));
}

void set_belief_if_declared(exec::ActionRuntime& rt, const std::string& key, double value) {
  if (rt.beliefs && rt.beliefs->has(key)) rt.beliefs->set(key, value);
}

std::optional<exec::ActionResult> schema_string(const Value& params, const char* name) {
  if (!params.contains(name) || !params[name].is_string() ||
      params[name].get<std::string>().empty())
    return exec::ActionResult::abort("SCHEMA_ERROR",
                                     {{"param", name}, {"expected", "non-empty string"}});
  return std::nullopt;
}

// Seeded Fisher-Yates; a fresh permutation per (seed, ordinal).
std::vector<std::string> permute_grasps(std::vector<std::string> grasps, std::uint64_t seed,
                                        std::uint64_t ordinal) {
  std::uint64_t h = mix_hash(seed, "pick.grasps", ordinal);
  for (std::size_t i = grasps.size(); i > 1; --i) {
    h = mix_hash(h, "swap", i);
    std::swap(grasps[i - 1], grasps[h % i]);
  }
  return grasps;
}

// Drops the held object into the container at the robot's position.
void drop_held_object(const Sim& sim, exec::ActionRuntime& rt) {
  std::string where = sim->world.robot_at.empty() ? "floor" : sim->world.robot_at;
  sim->world.stations[where].insert(sim->world.holding);
  sim->world.holding.clear();
  set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", 0.0);
}

void add(exec::ActionRegistry& registry, const std::string& name,
         std::set<std::string> required, std::vector<std::string> outputs,
         std::function<exec::ActionResult(const Value&, exec::ActionRuntime&)> execute) {
  exec::ActionHandler handler;
  handler.name = name;
  handler.signature.required_params = std::move(required);
  handler.signature.outputs = std::move(outputs);
  handler.execute = std::move(execute);
  registry.register_action(std::move(handler));
}

}  // namespace

const std::vector<std::string>& injectable_signals(const std::string& action) {
  static const std::vector<std::string> kNone;
  auto it = kInjectable.find(action);
  return it == kInjectable.end() ? kNone : it->second;
}

const std::vector<std::string>& mock_action_names() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const auto& entry : kInjectable) names.push_back(entry.first);
    return names;
  }();
  return kNames;
}

void register_mock_actions(exec::ActionRegistry& registry, std::shared_ptr<SimContext> sim) {
  add(registry, "navigate", {"waypoint"}, {},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "waypoint")) return *bad;
        std::string waypoint = params["waypoint"].get<std::string>();
        bool known = sim->world.stations.count(waypoint) || waypoint == "dock";
        if (!known && rt.db && !rt.db->empty() && !rt.db->has("waypoints." + waypoint))
          return exec::ActionResult::abort("UNKNOWN_WAYPOINT", {{"waypoint", waypoint}});
        if (auto signal = injected(sim, "navigate", rt.ordinal)) {
          if (*signal == "LOCALIZATION_LOST")
            set_belief_if_declared(rt, "ROBOT_AT_EXPECTED_LOCATION", 0.0);
          return exec::ActionResult::abort(*signal, {{"waypoint", waypoint}});
        }
        sim->world.robot_at = waypoint;
        set_belief_if_declared(rt, "ROBOT_AT_EXPECTED_LOCATION", 1.0);
        return exec::ActionResult::success();
      });

  add(registry, "reposition", {"waypoint"}, {},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "waypoint")) return *bad;
        std::string waypoint = params["waypoint"].get<std::string>();
        if (auto signal = injected(sim, "reposition", rt.ordinal))
          return exec::ActionResult::abort(*signal, {{"waypoint", waypoint}});
        sim->world.robot_at = waypoint;
        set_belief_if_declared(rt, "ROBOT_AT_EXPECTED_LOCATION", 1.0);
        return exec::ActionResult::success();
      });

  add(registry, "look", {"pose"}, {}, [sim](const Value& params, exec::ActionRuntime& rt) {
    if (!params.contains("pose") || params["pose"].is_null())
      return exec::ActionResult::abort("SCHEMA_ERROR",
                                       {{"param", "pose"}, {"expected", "pose or name"}});
    if (auto signal = injected(sim, "look", rt.ordinal))
      return exec::ActionResult::abort(*signal);
    return exec::ActionResult::success();
  });

  add(registry, "segment", {}, {"segments"}, [sim](const Value&, exec::ActionRuntime& rt) {
    if (auto signal = injected(sim, "segment", rt.ordinal))
      return exec::ActionResult::abort(*signal);
    auto it = sim->world.stations.find(sim->world.robot_at);
    std::size_t count = it == sim->world.stations.end() ? 0 : it->second.size();
    return exec::ActionResult::success({{"segments", count}});
  });

  add(registry, "detect_object", {"object_key"}, {"object_idx", "grasps"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "object_key")) return *bad;
        std::string object = params["object_key"].get<std::string>();
        auto it = sim->world.stations.find(sim->world.robot_at);
        if (it == sim->world.stations.end() || !it->second.count(object))
          return exec::ActionResult::abort(
              "NO_OBJECT", {{"object_key", object}, {"station", sim->world.robot_at}});
        if (auto signal = injected(sim, "detect_object", rt.ordinal))
          return exec::ActionResult::abort(*signal, {{"object_key", object}});
        std::size_t idx = 0;
        for (const auto& other : it->second) {
          if (other == object) break;
          ++idx;
        }
        Value grasps = Value::array({"top_grasp", "side_grasp", "angled_grasp"});
        return exec::ActionResult::success({{"object_idx", idx}, {"grasps", grasps}});
      });

  add(registry, "detect_schunk", {}, {"chuck_approach_pose"},
      [sim](const Value&, exec::ActionRuntime& rt) {
        if (auto signal = injected(sim, "detect_schunk", rt.ordinal))
          return exec::ActionResult::abort(*signal);
        Value pose = {{"x", 0.42}, {"y", 0.08}, {"yaw", 1.57}};
        if (rt.db && rt.db->has("poses.schunk_approach"))
          pose = rt.db->get("poses.schunk_approach").to_value();
        return exec::ActionResult::success({{"chuck_approach_pose", pose}});
      });

  add(registry, "detect_large_object_pose", {"object_key"}, {"object_pose"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "object_key")) return *bad;
        std::string object = params["object_key"].get<std::string>();
        auto it = sim->world.stations.find(sim->world.robot_at);
        if (it == sim->world.stations.end() || !it->second.count(object))
          return exec::ActionResult::abort(
              "NO_OBJECT", {{"object_key", object}, {"station", sim->world.robot_at}});
        if (auto signal = injected(sim, "detect_large_object_pose", rt.ordinal))
          return exec::ActionResult::abort(*signal, {{"object_key", object}});
        Value pose = {{"x", 0.1}, {"y", -0.2}, {"yaw", 0.0}};
        return exec::ActionResult::success({{"object_pose", pose}});
      });

  add(registry, "pick", {"object_idx", "grasps", "object_key"}, {"used_grasp"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "object_key")) return *bad;
        if (!params.contains("object_idx") || !params["object_idx"].is_number_integer())
          return exec::ActionResult::abort("SCHEMA_ERROR",
                                           {{"param", "object_idx"}, {"expected", "int"}});
        if (!params.contains("grasps") || !params["grasps"].is_array())
          return exec::ActionResult::abort("SCHEMA_ERROR",
                                           {{"param", "grasps"}, {"expected", "list"}});
        std::vector<std::string> candidates;
        for (const auto& g : params["grasps"]) {
          if (!g.is_string())
            return exec::ActionResult::abort(
                "SCHEMA_ERROR", {{"param", "grasps"}, {"expected", "list of names"}});
          candidates.push_back(g.get<std::string>());
        }
        std::string object = params["object_key"].get<std::string>();

        if (!sim->world.holding.empty())
          return exec::ActionResult::abort("GRIPPER_FULL", {{"holding", sim->world.holding}});
        auto station = sim->world.station_of(object);
        if (!station) return exec::ActionResult::abort("NO_OBJECT", {{"object_key", object}});
        if (*station != sim->world.robot_at)
          return exec::ActionResult::abort("NOT_AT_STATION",
                                           {{"object_key", object},
                                            {"station", *station},
                                            {"robot_at", sim->world.robot_at}});

        std::vector<std::string> order =
            permute_grasps(candidates, sim->plan.seed ^ sim->run_seed, rt.ordinal);
        sim->pick_draws.push_back(order);

        if (auto signal = injected(sim, "pick", rt.ordinal)) {
          if (*signal == "DROPPED_OBJECT") set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", 0.0);
          if (*signal == "PLANNING_FAILURE") set_belief_if_declared(rt, "ARM_CLEAR", 0.0);
          return exec::ActionResult::abort(*signal, {{"object_key", object}});
        }
        sim->world.stations[*station].erase(sim->world.stations[*station].find(object));
        sim->world.holding = object;
        set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", 1.0);
        return exec::ActionResult::success({{"used_grasp", order.empty() ? "" : order.front()}});
      });

  add(registry, "verify_grasp", {"abort_on_false"}, {"grasped"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (!params.contains("abort_on_false") || !params["abort_on_false"].is_boolean())
          return exec::ActionResult::abort(
              "SCHEMA_ERROR", {{"param", "abort_on_false"}, {"expected", "bool"}});
        if (auto signal = injected(sim, "verify_grasp", rt.ordinal))
          return exec::ActionResult::abort(*signal);
        bool grasped = !sim->world.holding.empty();
        set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", grasped ? 1.0 : 0.0);
        if (!grasped && params["abort_on_false"].get<bool>())
          return exec::ActionResult::abort("GRIPPER_EMPTY");
        return exec::ActionResult::success({{"grasped", grasped}});
      });

  add(registry, "in_hand_localize", {}, {"in_hand_pose"},
      [sim](const Value&, exec::ActionRuntime& rt) {
        if (sim->world.holding.empty()) return exec::ActionResult::abort("GRIPPER_EMPTY");
        if (auto signal = injected(sim, "in_hand_localize", rt.ordinal))
          return exec::ActionResult::abort(*signal, {{"holding", sim->world.holding}});
        Value pose = {{"x", 0.0}, {"y", 0.0}, {"yaw", 0.0}};
        return exec::ActionResult::success({{"in_hand_pose", pose}});
      });

  add(registry, "place_in_kit", {"object_key"}, {"slot"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "object_key")) return *bad;
        if (sim->world.holding.empty()) return exec::ActionResult::abort("GRIPPER_EMPTY");
        std::string object = sim->world.holding;
        std::string type =
            sim->world.object_types.count(object) ? sim->world.object_types.at(object) : "";
        auto slot = sim->world.empty_slot_for(type);
        if (!slot)
          return exec::ActionResult::abort("NO_SLOT", {{"object_key", object}, {"type", type}});
        if (auto signal = injected(sim, "place_in_kit", rt.ordinal)) {
          if (*signal == "DROPPED_OBJECT") drop_held_object(sim, rt);
          return exec::ActionResult::abort(*signal, {{"object_key", object}});
        }
        sim->world.kit[*slot] = object;
        sim->world.holding.clear();
        set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", 0.0);
        return exec::ActionResult::success({{"slot", *slot}});
      });

  add(registry, "insert_gear", {"object_key"}, {"slot"},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "object_key")) return *bad;
        if (sim->world.holding.empty()) return exec::ActionResult::abort("GRIPPER_EMPTY");
        std::string object = sim->world.holding;
        std::string type =
            sim->world.object_types.count(object) ? sim->world.object_types.at(object) : "";
        if (type != "small_gear" && type != "large_gear")
          return exec::ActionResult::abort("WRONG_OBJECT", {{"holding", object}, {"type", type}});
        auto slot = sim->world.empty_slot_for(type);
        if (!slot)
          return exec::ActionResult::abort("NO_SLOT", {{"object_key", object}, {"type", type}});
        if (auto signal = injected(sim, "insert_gear", rt.ordinal)) {
          if (*signal == "FALSE_POSITIVE_INSERT") drop_held_object(sim, rt);
          return exec::ActionResult::abort(*signal, {{"object_key", object}});
        }
        sim->world.kit[*slot] = object;
        sim->world.holding.clear();
        set_belief_if_declared(rt, "OBJECT_IN_GRIPPER", 0.0);
        return exec::ActionResult::success({{"slot", *slot}});
      });

  add(registry, "move_arm", {"motion"}, {},
      [sim](const Value& params, exec::ActionRuntime& rt) {
        if (auto bad = schema_string(params, "motion")) return *bad;
        if (auto signal = injected(sim, "move_arm", rt.ordinal)) {
          if (*signal == "PLANNING_FAILURE") set_belief_if_declared(rt, "ARM_CLEAR", 0.0);
          return exec::ActionResult::abort(*signal, {{"motion", params["motion"]}});
        }
        set_belief_if_declared(rt, "ARM_CLEAR", 1.0);
        return exec::ActionResult::success();
      });

  add(registry, "reinit_obstacle_map", {}, {},
      [sim](const Value&, exec::ActionRuntime& rt) {
        if (auto signal = injected(sim, "reinit_obstacle_map", rt.ordinal))
          return exec::ActionResult::abort(*signal);
        return exec::ActionResult::success();
      });
}

}  // namespace rtask::sim
