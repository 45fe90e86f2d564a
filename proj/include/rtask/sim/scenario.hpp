// End-to-end composition: load every document, wire world + registry +
// supervision, run, and report.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtask/dsl/ast.hpp"
#include "rtask/exec/session.hpp"
#include "rtask/exec/trace.hpp"
#include "rtask/monitor/report.hpp"
#include "rtask/monitor/rules.hpp"
#include "rtask/monitor/supervisor.hpp"
#include "rtask/sim/mock_actions.hpp"
#include "rtask/sim/world.hpp"

namespace rtask::sim {

struct ScenarioConfig {
  std::vector<std::string> recipe_paths;
  std::vector<std::string> recovery_paths;
  std::optional<std::string> rules_path;  // absent: empty rule set
  std::string db_path;
  std::string beliefs_path;
  std::string scenario_path;
  std::optional<std::string> fault_plan_path;  // absent: no injected faults
  std::string root_task = "main_task";
  std::uint64_t seed = 0;
  monitor::SupervisorConfig supervisor;
};

struct ScenarioResult {
  exec::ExecutionSession session;
  exec::Trace trace;
  monitor::StatsReport stats;
  WorldState final_world;
};

// Documents already in memory, for callers that synthesize or edit them.
struct ScenarioDocuments {
  dsl::TaskLibrary recipes;       // validated against the mock catalog
  dsl::TaskLibrary recoveries;    // validated
  monitor::RuleSet rules;
  knowledge::Database db;
  knowledge::BeliefState beliefs;
  WorldState world;
  FaultInjectionPlan plan;
};

// Loads and validates every document in `config` (throws LoadError on any
// problem: the preflight), without running.
ScenarioDocuments load_scenario_documents(const ScenarioConfig& config);

ScenarioResult run_scenario(const ScenarioConfig& config);
ScenarioResult run_scenario(const ScenarioDocuments& docs, const std::string& root,
                            std::uint64_t seed, const monitor::SupervisorConfig& supervisor);

}  // namespace rtask::sim
