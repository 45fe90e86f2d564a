// Acceptance gate: eight end-to-end criteria, one PASS/FAIL line each.
// Exit status is 0 only when every criterion passes. No test framework;
// failures carry enough text to localize the break without a debugger.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "resumption_oracle.hpp"
#include "rtask/dsl/ast.hpp"
#include "rtask/dsl/parser.hpp"
#include "rtask/dsl/serialize.hpp"
#include "rtask/dsl/validate.hpp"
#include "rtask/errors.hpp"
#include "rtask/exec/action.hpp"
#include "rtask/exec/engine.hpp"
#include "rtask/exec/session.hpp"
#include "rtask/exec/trace.hpp"
#include "rtask/monitor/ledger.hpp"
#include "rtask/monitor/report.hpp"
#include "rtask/monitor/rules.hpp"
#include "rtask/sim/fault_plan.hpp"
#include "rtask/sim/scenario.hpp"
#include "rtask/value.hpp"

using namespace rtask;

namespace {

struct Gate {
  std::vector<std::string> failures;
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string data_path(const std::string& name) { return std::string(DATA_DIR) + "/" + name; }

sim::ScenarioConfig corpus_config() {
  sim::ScenarioConfig config;
  config.recipe_paths = {data_path("recipes.yaml")};
  config.recovery_paths = {data_path("recoveries.yaml")};
  config.rules_path = data_path("rules.yaml");
  config.db_path = data_path("db.yaml");
  config.beliefs_path = data_path("beliefs.yaml");
  config.scenario_path = data_path("scenario.yaml");
  return config;
}

// ---------------------------------------------------------------------------
// Criterion 1: the two documented kit-assembly recipes parse into the exact
// structure shown in the recipe-language walkthrough, validate cleanly,
// expand to the documented trees, and survive a serialization round trip.

const char* kListingText = R"(detect_schunk_pose_task:
  params:
  - look_location

  var:
  - chuck_approach_pose

  steps:
  - action: look
    params:
      pose: params.look_location

  - action: detect_schunk
    var:
    - chuck_approach_pose

pick_task:
  params: [object_idx, grasps, object_key]
  var: [grasped]
  steps:
  - action: pick
    params:
      object_idx: params.object_idx
      grasps: params.grasps
      object_key: params.object_key

  - action: verify_grasp
    params:
      abort_on_false: false
    var:
    - grasped
)";

void fill_listing_registry(exec::ActionRegistry& reg) {
  auto add = [&reg](const std::string& name, std::set<std::string> required,
                    std::vector<std::string> outputs) {
    exec::ActionHandler h;
    h.name = name;
    h.signature.required_params = std::move(required);
    h.signature.outputs = std::move(outputs);
    h.execute = [](const Value&, exec::ActionRuntime&) { return exec::ActionResult::success(); };
    reg.register_action(std::move(h));
  };
  add("look", {"pose"}, {});
  add("detect_schunk", {}, {"chuck_approach_pose"});
  add("pick", {"object_idx", "grasps", "object_key"}, {"used_grasp"});
  add("verify_grasp", {"abort_on_false"}, {"grasped"});
}

std::vector<std::string> leaf_targets(const dsl::ExpandedNode& node) {
  std::vector<std::string> out;
  if (node.children.empty() && node.kind == dsl::StepKind::Action) out.push_back(node.target);
  for (const auto& child : node.children) {
    auto sub = leaf_targets(child);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

void criterion_listing_fidelity(Gate& g) {
  dsl::TaskLibrary lib = dsl::parse_recipe(kListingText);
  g.require(lib.definitions.size() == 2, "expected exactly two task definitions");

  const dsl::TaskDefinition* detect = lib.find("detect_schunk_pose_task");
  g.require(detect != nullptr, "detect_schunk_pose_task missing");
  if (detect) {
    g.require(detect->params == std::vector<std::string>{"look_location"},
              "detect_schunk_pose_task params mismatch");
    g.require(detect->vars == std::vector<std::string>{"chuck_approach_pose"},
              "detect_schunk_pose_task var mismatch");
    g.require(detect->steps.size() == 2, "detect_schunk_pose_task step count mismatch");
    if (detect->steps.size() == 2) {
      const dsl::Step& look = detect->steps[0];
      g.require(look.kind == dsl::StepKind::Action && look.target == "look",
                "first step is not action look");
      g.require(look.params.size() == 1 && look.params[0].first == "pose" &&
                    look.params[0].second == dsl::Expression::make_param_ref("look_location"),
                "look pose should reference params.look_location");
      g.require(detect->steps[1].var == std::vector<std::string>{"chuck_approach_pose"},
                "detect_schunk should capture chuck_approach_pose");
    }
  }

  const dsl::TaskDefinition* pick = lib.find("pick_task");
  g.require(pick != nullptr, "pick_task missing");
  if (pick) {
    g.require(pick->params == std::vector<std::string>{"object_idx", "grasps", "object_key"},
              "pick_task params mismatch");
    g.require(pick->vars == std::vector<std::string>{"grasped"}, "pick_task var mismatch");
    g.require(pick->steps.size() == 2, "pick_task step count mismatch");
    if (pick->steps.size() == 2) {
      g.require(pick->steps[0].params.size() == 3 &&
                    pick->steps[0].params[0].second ==
                        dsl::Expression::make_param_ref("object_idx"),
                "pick params should forward the task params");
      const dsl::Step& verify = pick->steps[1];
      g.require(verify.params.size() == 1 &&
                    verify.params[0].second == dsl::Expression::make_literal(Value(false)),
                "verify_grasp abort_on_false should be the literal false");
      g.require(verify.var == std::vector<std::string>{"grasped"},
                "verify_grasp should capture grasped");
    }
  }

  exec::ActionRegistry reg;
  fill_listing_registry(reg);
  auto diags = dsl::validate(lib, rtest::context_for(reg));
  g.require(!has_errors(diags), "listing should validate without errors");
  g.require(lib.validated, "library should be marked validated");

  dsl::ExpandedNode pick_tree = dsl::expand_tree(lib, "pick_task");
  g.require(dsl::count_nodes(pick_tree) == 3, "pick_task should expand to three nodes");
  g.require(leaf_targets(pick_tree) == std::vector<std::string>{"pick", "verify_grasp"},
            "pick_task leaves mismatch");
  dsl::ExpandedNode detect_tree = dsl::expand_tree(lib, "detect_schunk_pose_task");
  g.require(dsl::count_nodes(detect_tree) == 3,
            "detect_schunk_pose_task should expand to three nodes");
  g.require(leaf_targets(detect_tree) == std::vector<std::string>{"look", "detect_schunk"},
            "detect_schunk_pose_task leaves mismatch");

  std::string emitted = dsl::serialize_library(lib);
  dsl::TaskLibrary reparsed = dsl::parse_recipe(emitted);
  g.require(lib.same_structure(reparsed), "round trip should preserve structure");
  g.require(dsl::serialize_library(reparsed) == emitted, "re-serialization should be stable");
}

// ---------------------------------------------------------------------------
// Criterion 2: all five resumption strategies, applied at every task level of
// a three-deep recipe with two distinct fault points, reproduce the
// brute-force reference model on all 30 combinations.

const char* kLayeredRecipe = R"(leaf_task:
  steps:
  - action: l1
  - action: l2
  - action: l3
mid_task:
  steps:
  - action: m1
  - task: leaf_task
  - action: m2
root_task:
  steps:
  - action: r1
  - task: mid_task
  - action: r2
)";

const std::vector<std::string> kLayeredActions = {"r1", "r2", "m1", "m2", "l1", "l2", "l3"};

exec::ResumptionStrategy engine_strategy(rtest::OracleStrategy s) {
  switch (s) {
    case rtest::OracleStrategy::None: return exec::ResumptionStrategy::None;
    case rtest::OracleStrategy::Continue: return exec::ResumptionStrategy::Continue;
    case rtest::OracleStrategy::Retry: return exec::ResumptionStrategy::Retry;
    case rtest::OracleStrategy::Next: return exec::ResumptionStrategy::Next;
    case rtest::OracleStrategy::Previous: return exec::ResumptionStrategy::Previous;
  }
  return exec::ResumptionStrategy::None;
}

const char* strategy_label(rtest::OracleStrategy s) {
  switch (s) {
    case rtest::OracleStrategy::None: return "RESUME_NONE";
    case rtest::OracleStrategy::Continue: return "RESUME_CONTINUE";
    case rtest::OracleStrategy::Retry: return "RESUME_RETRY";
    case rtest::OracleStrategy::Next: return "RESUME_NEXT";
    case rtest::OracleStrategy::Previous: return "RESUME_PREVIOUS";
  }
  return "?";
}

void criterion_resumption_oracle(Gate& g) {
  const auto program = rtest::oracle_program();
  const std::vector<rtest::OracleStrategy> strategies = {
      rtest::OracleStrategy::None, rtest::OracleStrategy::Continue, rtest::OracleStrategy::Retry,
      rtest::OracleStrategy::Next, rtest::OracleStrategy::Previous};
  const std::vector<std::string> targets = {"root_task", "mid_task", "leaf_task"};
  const std::vector<std::string> faults = {"l1", "l2"};

  int cases = 0;
  int mismatches = 0;
  for (const auto& fault : faults) {
    for (rtest::OracleStrategy strategy : strategies) {
      for (const auto& target : targets) {
        cases++;
        std::string tag = std::string(strategy_label(strategy)) + " fault=" + fault +
                          " target=" + target;

        rtest::EngineFixture fx;
        for (const auto& name : kLayeredActions) {
          if (name == fault)
            rtest::add_probe(fx.reg, fx.log, name, {1}, "CASE_FAULT");
          else
            rtest::add_probe(fx.reg, fx.log, name);
        }
        fx.lib = rtest::parse_valid(kLayeredRecipe, fx.reg);
        exec::Engine engine(fx.lib, fx.reg, fx.db, fx.beliefs, fx.trace);
        exec::ExecutionSession session = engine.execute("root_task", Value::object());
        if (session.status != exec::SessionStatus::PausedOnFault) {
          mismatches++;
          g.require(false, tag + ": run did not pause on the injected fault");
          continue;
        }
        engine.resume(session, {engine_strategy(strategy), target});

        auto expected = rtest::oracle_run(program, "root_task", fault, strategy, target);
        bool aborted = session.status == exec::SessionStatus::AbortedFinal;
        bool succeeded = session.status == exec::SessionStatus::Succeeded;
        if (fx.log->executed != expected.executed || aborted != expected.aborted ||
            (aborted == succeeded)) {
          mismatches++;
          std::ostringstream os;
          os << tag << ": expected [";
          for (const auto& a : expected.executed) os << a << " ";
          os << "] aborted=" << expected.aborted << ", engine ran [";
          for (const auto& a : fx.log->executed) os << a << " ";
          os << "] status=" << exec::session_status_name(session.status);
          g.require(false, os.str());
        }
      }
    }
  }
  g.require(cases == 30, "expected 30 strategy/level/fault combinations");
  g.require(mismatches == 0,
            std::to_string(mismatches) + " of " + std::to_string(cases) +
                " cases diverged from the reference model");
}

// ---------------------------------------------------------------------------
// Criterion 3: three consecutive planning failures on pick fire the shared
// recovery at abort counts 1 and 2, escalate at 3, and the session still
// completes the kit.

void criterion_escalation_order(Gate& g) {
  sim::ScenarioConfig config = corpus_config();
  config.fault_plan_path = data_path("faults_escalation.yaml");
  config.seed = 11;
  sim::ScenarioResult result = sim::run_scenario(config);

  g.require(result.session.status == exec::SessionStatus::Succeeded,
            std::string("session should succeed, got ") +
                exec::session_status_name(result.session.status));
  g.require(result.final_world.kit_complete(), "kit should be complete");

  std::vector<std::pair<std::string, std::uint64_t>> firing;
  for (const auto& event : result.trace.events()) {
    if (event.event != "diagnosis") continue;
    firing.emplace_back(event.payload.at("decision").value("rule_id", ""),
                        event.payload.value("consecutive_abort_count", std::uint64_t{0}));
  }
  const std::vector<std::pair<std::string, std::uint64_t>> expected = {
      {"shared_planning_recovery", 1},
      {"shared_planning_recovery", 2},
      {"escalated_planning_recovery", 3}};
  if (firing != expected) {
    std::ostringstream os;
    os << "firing order mismatch:";
    for (const auto& [id, n] : firing) os << " " << id << "@" << n;
    g.require(false, os.str());
  }
}

// ---------------------------------------------------------------------------
// Criterion 4: twenty randomized but valid edits of the rule file (reorder,
// swap, delete, clone, threshold shifts, bound widening, strategy cycling)
// leave the fault-free trace byte-identical, because rules are consulted
// only at faults.

void mutate_rules(monitor::RuleSet& rs, int edit, std::mt19937& rng) {
  auto pick = [&rng](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  const std::size_t n = rs.rules.size();
  switch (edit % 7) {
    case 0:
      std::rotate(rs.rules.begin(), rs.rules.begin() + 1 + static_cast<std::ptrdiff_t>(pick(n - 1)),
                  rs.rules.end());
      break;
    case 1:
      std::swap(rs.rules[pick(n)], rs.rules[pick(n)]);
      break;
    case 2:
      if (n > 1) rs.rules.erase(rs.rules.begin() + static_cast<std::ptrdiff_t>(pick(n)));
      break;
    case 3: {
      monitor::RecoveryRule copy = rs.rules[pick(n)];
      copy.id += "_edit" + std::to_string(edit);
      rs.rules.push_back(std::move(copy));
      break;
    }
    case 4:
      for (auto& rule : rs.rules)
        for (auto& pred : rule.belief_predicates) pred.threshold += 0.13;
      break;
    case 5:
      for (auto& rule : rs.rules)
        if (rule.explicit_abort_bounds)
          rule.max_consecutive_aborts = rule.min_consecutive_aborts + 2 + pick(4);
      break;
    default:
      for (auto& rule : rs.rules)
        if (rule.resumption) {
          int next = (static_cast<int>(rule.resumption->strategy) + 1) % 5;
          rule.resumption->strategy = static_cast<exec::ResumptionStrategy>(next);
        }
      break;
  }
}

void criterion_rule_edit_invariance(Gate& g) {
  sim::ScenarioConfig config = corpus_config();
  sim::ScenarioDocuments docs = sim::load_scenario_documents(config);
  const std::set<std::string> belief_keys = docs.beliefs.keys();
  const monitor::RuleSet original = docs.rules;
  g.require(original.rules.size() >= 5, "rule corpus unexpectedly small");

  monitor::SupervisorConfig sup;
  const std::string baseline =
      sim::run_scenario(docs, "main_task", 5, sup).trace.to_jsonl();
  g.require(!baseline.empty(), "baseline trace is empty");

  std::mt19937 rng(9001);
  for (int edit = 0; edit < 20; edit++) {
    monitor::RuleSet mutated = original;
    mutate_rules(mutated, edit, rng);
    std::string text = monitor::serialize_rules(mutated);
    try {
      docs.rules = monitor::load_rules(text, docs.recoveries, belief_keys);
    } catch (const LoadError& e) {
      g.require(false, "edit " + std::to_string(edit) + " produced an invalid rule file: " +
                           e.what());
      continue;
    }
    std::string trace = sim::run_scenario(docs, "main_task", 5, sup).trace.to_jsonl();
    g.require(trace == baseline,
              "edit " + std::to_string(edit) + " changed the fault-free trace");
  }
}

// ---------------------------------------------------------------------------
// Criterion 5: with faults injected at p=0.2 per action, runs with the rule
// corpus enabled complete strictly more often over 20 seeds than runs with
// recovery disabled, and a fully matched deterministic plan completes.

void criterion_stochastic_recovery(Gate& g) {
  sim::ScenarioConfig config = corpus_config();
  config.fault_plan_path = data_path("faults_stochastic.yaml");
  sim::ScenarioDocuments docs = sim::load_scenario_documents(config);
  sim::ScenarioDocuments bare = docs;
  bare.rules = monitor::RuleSet{};

  monitor::SupervisorConfig sup;
  int with_rules = 0;
  int without_rules = 0;
  for (std::uint64_t seed = 1; seed <= 20; seed++) {
    if (sim::run_scenario(docs, "main_task", seed, sup).session.status ==
        exec::SessionStatus::Succeeded)
      with_rules++;
    if (sim::run_scenario(bare, "main_task", seed, sup).session.status ==
        exec::SessionStatus::Succeeded)
      without_rules++;
  }
  g.require(with_rules > without_rules,
            "rules-enabled completions (" + std::to_string(with_rules) +
                ") not strictly above disabled (" + std::to_string(without_rules) + ")");
  g.require(with_rules >= 1, "no stochastic run completed even with rules enabled");

  sim::ScenarioConfig matched = corpus_config();
  matched.fault_plan_path = data_path("faults_matched.yaml");
  matched.seed = 7;
  sim::ScenarioResult result = sim::run_scenario(matched);
  g.require(result.session.status == exec::SessionStatus::Succeeded,
            "fully matched deterministic plan should complete");
  g.require(result.final_world.kit_complete(), "matched plan should fill the kit");
}

// ---------------------------------------------------------------------------
// Criterion 6: a scripted signal no rule matches, under the always-exit
// policy, ends the session ABORTED_FINAL; the logged recursive fault context
// mirrors the paused interpreter stack level by level; the report counts the
// exit under RESUME_NONE.

void criterion_unseen_fault_context(Gate& g) {
  sim::ScenarioConfig config = corpus_config();
  sim::ScenarioDocuments docs = sim::load_scenario_documents(config);
  docs.plan = sim::FaultInjectionPlan{};
  docs.plan.deterministic.push_back({"segment", 2, "CAMERA_OFFLINE"});

  monitor::SupervisorConfig sup;
  sup.unseen_policy = monitor::UnseenPolicy::AlwaysExit;
  sim::ScenarioResult result = sim::run_scenario(docs, "main_task", 3, sup);

  g.require(result.session.status == exec::SessionStatus::AbortedFinal,
            std::string("expected ABORTED_FINAL, got ") +
                exec::session_status_name(result.session.status));
  g.require(result.session.fault.has_value(), "final session should retain the fault");
  if (!result.session.fault) return;
  const exec::FaultContext& fault = *result.session.fault;
  g.require(fault.error_signal == "CAMERA_OFFLINE", "unexpected error signal");

  const auto& stack = result.session.stack;
  g.require(fault.chain.size() == stack.size() + 1,
            "chain should have one level per frame plus the leaf (chain " +
                std::to_string(fault.chain.size()) + ", stack " +
                std::to_string(stack.size()) + ")");
  if (fault.chain.size() == stack.size() + 1) {
    for (std::size_t i = 0; i < stack.size(); i++) {
      const exec::Frame& frame = stack[i];
      std::string unit = frame.kind == exec::FrameKind::Task ? frame.unit : frame.name;
      std::string kind = frame.kind == exec::FrameKind::Task
                             ? "task"
                             : (frame.kind == exec::FrameKind::Branch ? "branch" : "loop");
      g.require(fault.chain[i].unit == unit && fault.chain[i].unit_kind == kind,
                "chain level " + std::to_string(i) + " (" + fault.chain[i].unit_kind + " " +
                    fault.chain[i].unit + ") does not mirror frame " + kind + " " + unit);
      g.require(fault.chain[i].step_index == frame.step_index,
                "chain level " + std::to_string(i) + " step index mismatch");
    }
    g.require(fault.chain.back().unit == "segment" &&
                  fault.chain.back().unit_kind == "action",
              "leaf level should be the segment action");
  }
  g.require(fault.chain.size() >= 5, "scripted fault should surface a deep nested chain");

  bool logged = false;
  for (const auto& event : result.trace.events()) {
    if (event.event != "unseen_fault") continue;
    logged = true;
    g.require(event.payload.contains("context") &&
                  event.payload.at("context").value("chain", Value()) ==
                      fault.to_json().at("chain"),
              "logged fault context chain differs from the session's");
  }
  g.require(logged, "no unseen_fault event was logged");

  g.require(result.stats.strategies.counts.at("RESUME_NONE") == 1 &&
                result.stats.strategies.denominator == 1,
            "report should count exactly one RESUME_NONE resumption");
  g.require(result.stats.properties.counts.at("OTHER") == 1,
            "unseen diagnosis should land in the OTHER property bucket");
}

// ---------------------------------------------------------------------------
// Criterion 7: object conservation holds across 1000 randomized fault plans;
// ledger counters agree with a brute-force recount over 1000 random event
// sequences; repeated seeded runs yield byte-identical traces.

void criterion_invariants(Gate& g) {
  sim::ScenarioConfig config = corpus_config();
  sim::ScenarioDocuments docs = sim::load_scenario_documents(config);
  monitor::SupervisorConfig sup;

  const double probabilities[] = {0.05, 0.1, 0.2, 0.35, 0.5};
  int conserved = 0;
  for (int i = 0; i < 1000; i++) {
    docs.plan = sim::FaultInjectionPlan{};
    docs.plan.default_probability = probabilities[i % 5];
    docs.plan.seed = 7000 + static_cast<std::uint64_t>(i);
    sim::ScenarioResult result =
        sim::run_scenario(docs, "main_task", 40000 + static_cast<std::uint64_t>(i), sup);
    if (result.final_world.conservation_holds()) conserved++;
    else
      g.require(false, "conservation violated at plan " + std::to_string(i) +
                           " (p=" + std::to_string(probabilities[i % 5]) + ")");
  }
  g.require(conserved == 1000, "conservation held in only " + std::to_string(conserved) +
                                   " of 1000 randomized runs");

  const std::vector<std::vector<std::string>> paths = {
      {"main"}, {"main", "work"}, {"main", "work", "inner"}, {"main", "other"}};
  const std::vector<std::string> leaves = {"drill", "hammer"};
  const std::vector<std::string> tasks = {"main", "work", "inner", "other"};
  std::mt19937 rng(613);
  int ledger_mismatches = 0;
  for (int seq = 0; seq < 1000; seq++) {
    monitor::AbortLedger ledger;
    struct Op {
      int kind;
      std::size_t path_idx;
      std::string leaf;
      std::string task;
    };
    std::vector<Op> ops;
    int len = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < len; i++) {
      Op op{static_cast<int>(rng() % 3), rng() % paths.size(), leaves[rng() % leaves.size()],
            tasks[rng() % tasks.size()]};
      switch (op.kind) {
        case 0: ledger.record_fault(paths[op.path_idx], op.leaf); break;
        case 1: ledger.record_leaf_success(paths[op.path_idx], op.leaf); break;
        default: ledger.record_task_success(op.task); break;
      }
      ops.push_back(op);
    }
    for (std::size_t p = 0; p < paths.size() && ledger_mismatches < 5; p++) {
      for (const auto& leaf : leaves) {
        std::uint64_t expected = 0;
        for (const auto& op : ops) {
          if (op.kind == 0 && op.path_idx == p && op.leaf == leaf) expected++;
          if (op.kind == 1 && op.path_idx == p && op.leaf == leaf) expected = 0;
        }
        if (ledger.leaf_count(paths[p], leaf) != expected) {
          ledger_mismatches++;
          g.require(false, "ledger leaf counter diverged in sequence " + std::to_string(seq));
        }
      }
    }
    for (const auto& task : tasks) {
      std::uint64_t expected = 0;
      for (const auto& op : ops) {
        bool on_path = false;
        if (op.kind == 0)
          for (const auto& name : paths[op.path_idx])
            if (name == task) on_path = true;
        if (on_path) expected++;
        if (op.kind == 2 && op.task == task) expected = 0;
      }
      if (ledger.task_count(task) != expected && ledger_mismatches < 5) {
        ledger_mismatches++;
        g.require(false, "ledger task counter diverged in sequence " + std::to_string(seq));
      }
    }
  }
  g.require(ledger_mismatches == 0, "ledger recount found divergences");

  sim::ScenarioConfig matched = corpus_config();
  matched.fault_plan_path = data_path("faults_matched.yaml");
  matched.seed = 7;
  std::string first;
  for (int run = 0; run < 10; run++) {
    sim::ScenarioResult result = sim::run_scenario(matched);
    g.require(result.session.status == exec::SessionStatus::Succeeded,
              "determinism run " + std::to_string(run) + " did not complete");
    std::string trace = result.trace.to_jsonl();
    if (run == 0)
      first = trace;
    else
      g.require(trace == first, "run " + std::to_string(run) + " trace differs byte-for-byte");
  }
  g.require(!first.empty(), "determinism baseline trace is empty");
}

// ---------------------------------------------------------------------------
// Criterion 8: the statistics report places every recovery event in exactly
// one bucket per breakdown, covers all named buckets, and its percentages
// sum to 100 within 0.01 whenever the denominator is nonzero.

void check_partition(Gate& g, const monitor::Breakdown& b, const std::string& label,
                     std::uint64_t expected_denominator) {
  std::uint64_t total = 0;
  for (const auto& [name, count] : b.counts) total += count;
  g.require(total == b.denominator,
            label + ": bucket counts sum to " + std::to_string(total) + ", denominator is " +
                std::to_string(b.denominator));
  g.require(b.denominator == expected_denominator,
            label + ": expected denominator " + std::to_string(expected_denominator) + ", got " +
                std::to_string(b.denominator));
  if (b.denominator == 0) {
    g.require(b.percentages.empty(), label + ": zero denominator must leave percentages empty");
    return;
  }
  double sum = 0.0;
  for (const auto& [name, pct] : b.percentages) sum += pct;
  g.require(std::fabs(sum - 100.0) <= 0.01,
            label + ": percentages sum to " + std::to_string(sum));
  g.require(b.percentages.size() == b.counts.size(),
            label + ": every bucket needs a percentage entry");
}

void criterion_report_partition(Gate& g) {
  exec::Trace trace;
  auto add_diagnosis = [&trace](Value tags, Value factors, bool unseen) {
    Value decision{{"unseen", unseen}, {"rule_id", unseen ? "" : "r"}};
    decision["tags"] = std::move(tags);
    decision["factors"] = std::move(factors);
    trace.append("diagnosis", {"x"}, {{"session", "main"}, {"decision", std::move(decision)}});
  };
  add_diagnosis(Value::array({"DYNAMIC"}), Value::array({"RECOVERY_RESULT"}), false);
  add_diagnosis(Value::array({"SHARED"}), Value::array({"BELIEF"}), false);
  add_diagnosis(Value::array({"IMMEDIATE"}), Value::array({"NUM_ABORTS"}), false);
  add_diagnosis(Value::array(), Value::array({"ERROR_SIGNAL"}), false);
  add_diagnosis(Value::array(), Value::array({"TASK_LOCATION"}), false);
  add_diagnosis(Value::array(), Value::array(), false);
  add_diagnosis(Value::array(), Value::array(), true);
  for (const char* s :
       {"RESUME_NONE", "RESUME_CONTINUE", "RESUME_RETRY", "RESUME_NEXT", "RESUME_PREVIOUS"})
    trace.append("resumption", {"x"}, {{"session", "main"}, {"strategy", s}});

  monitor::StatsReport stats = monitor::report(trace);
  check_partition(g, stats.properties, "properties", 7);
  check_partition(g, stats.factors, "factors", 7);
  check_partition(g, stats.strategies, "strategies", 5);

  for (const char* name : {"SHARED", "IMMEDIATE", "DYNAMIC"})
    g.require(stats.properties.counts.count(name) == 1,
              std::string("properties missing bucket ") + name);
  for (const char* name :
       {"TASK_LOCATION", "NUM_ABORTS", "BELIEF", "ERROR_SIGNAL", "RECOVERY_RESULT"})
    g.require(stats.factors.counts.count(name) == 1,
              std::string("factors missing bucket ") + name);
  for (const char* name :
       {"RESUME_NONE", "RESUME_CONTINUE", "RESUME_RETRY", "RESUME_NEXT", "RESUME_PREVIOUS"})
    g.require(stats.strategies.counts.count(name) == 1,
              std::string("strategies missing bucket ") + name);

  g.require(stats.properties.counts.at("DYNAMIC") == 1 &&
                stats.properties.counts.at("SHARED") == 1 &&
                stats.properties.counts.at("IMMEDIATE") == 1 &&
                stats.properties.counts.at("OTHER") == 4,
            "property bucket counts mismatch");
  g.require(stats.factors.counts.at("RECOVERY_RESULT") == 1 &&
                stats.factors.counts.at("BELIEF") == 1 &&
                stats.factors.counts.at("NUM_ABORTS") == 1 &&
                stats.factors.counts.at("ERROR_SIGNAL") == 1 &&
                stats.factors.counts.at("TASK_LOCATION") == 1 &&
                stats.factors.counts.at("OTHER") == 2,
            "factor bucket counts mismatch");
  for (const auto& [name, count] : stats.strategies.counts)
    g.require(count == 1, "strategy bucket " + name + " should count exactly one event");

  monitor::StatsReport empty = monitor::report(exec::Trace{});
  check_partition(g, empty.properties, "empty properties", 0);
  check_partition(g, empty.factors, "empty factors", 0);
  check_partition(g, empty.strategies, "empty strategies", 0);

  sim::ScenarioConfig matched = corpus_config();
  matched.fault_plan_path = data_path("faults_matched.yaml");
  matched.seed = 7;
  sim::ScenarioResult result = sim::run_scenario(matched);
  g.require(result.stats.recovery_events > 0, "matched run should produce recovery events");
  check_partition(g, result.stats.properties, "matched properties", result.stats.recovery_events);
  check_partition(g, result.stats.factors, "matched factors", result.stats.recovery_events);
  std::uint64_t strategy_total = 0;
  for (const auto& [name, count] : result.stats.strategies.counts) strategy_total += count;
  g.require(strategy_total == result.stats.strategies.denominator,
            "matched strategies breakdown is not a partition");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    void (*fn)(Gate&);
    double budget_seconds;
  };
  const Criterion criteria[] = {
      {"recipe listing fidelity and round trip", criterion_listing_fidelity, 1.0},
      {"resumption strategies match reference model (30 cases)", criterion_resumption_oracle,
       5.0},
      {"escalating recovery firing order", criterion_escalation_order, 0.0},
      {"rule edits leave fault-free trace identical", criterion_rule_edit_invariance, 0.0},
      {"stochastic faults: recovery beats no recovery", criterion_stochastic_recovery, 60.0},
      {"unseen fault: final abort with mirrored context", criterion_unseen_fault_context, 0.0},
      {"conservation, ledger recount, trace determinism", criterion_invariants, 0.0},
      {"report partition and percentage closure", criterion_report_partition, 0.0},
  };

  bool all_passed = true;
  for (const Criterion& criterion : criteria) {
    Gate gate;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.fn(gate);
    } catch (const std::exception& e) {
      gate.failures.push_back(std::string("unhandled exception: ") + e.what());
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criterion.budget_seconds > 0.0 && elapsed > criterion.budget_seconds) {
      std::ostringstream os;
      os << "time budget exceeded: " << elapsed << "s > " << criterion.budget_seconds << "s";
      gate.failures.push_back(os.str());
    }
    if (gate.failures.empty()) {
      std::printf("PASS  %-52s (%.2fs)\n", criterion.name, elapsed);
    } else {
      all_passed = false;
      std::printf("FAIL  %-52s (%.2fs)\n", criterion.name, elapsed);
      std::size_t shown = 0;
      for (const auto& failure : gate.failures) {
        if (shown++ == 5) {
          std::printf("        ... and %zu more\n", gate.failures.size() - 5);
          break;
        }
        std::printf("        - %s\n", failure.c_str());
      }
    }
  }
  return all_passed ? 0 : 1;
}
