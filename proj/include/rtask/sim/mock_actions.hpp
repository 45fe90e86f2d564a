// Mock behavior-level actions over the simulated world, with fault
// injection, belief side-effects, and per-action error-signal vocabularies.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rtask/exec/action.hpp"
#include "rtask/sim/fault_plan.hpp"
#include "rtask/sim/world.hpp"

namespace rtask::sim {

// Shared mutable state behind the mock handlers. One instance per run.
struct SimContext {
  WorldState world;
  FaultInjectionPlan plan;
  std::uint64_t run_seed = 0;
  // Grasp candidate orderings drawn by pick, for tests that compare retries.
  std::vector<std::vector<std::string>> pick_draws;
};

// Signals an action can draw under stochastic injection; natural
// precondition signals (NO_OBJECT, GRIPPER_FULL, ...) are not injectable.
const std::vector<std::string>& injectable_signals(const std::string& action);

// All mock action names registered by register_mock_actions.
const std::vector<std::string>& mock_action_names();

// Registers the mock catalog (navigate, reposition, look, segment,
// detect_object, detect_schunk, detect_large_object_pose, pick,
// verify_grasp, in_hand_localize, place_in_kit, insert_gear, move_arm,
// reinit_obstacle_map) against the shared context.
void register_mock_actions(exec::ActionRegistry& registry, std::shared_ptr<SimContext> sim);

}  // namespace rtask::sim
