#include "rtask/sim/scenario.hpp"

#include <algorithm>

#include "rtask/dsl/parser.hpp"
#include "rtask/dsl/validate.hpp"
#include "rtask/errors.hpp"

namespace rtask::sim {

namespace {

dsl::TaskLibrary load_merged(const std::vector<std::string>& paths) {
  dsl::TaskLibrary lib;
  for (const auto& path : paths) {
    dsl::TaskLibrary part = dsl::parse_recipe_file(path);
    dsl::merge_libraries(lib, part);
  }
  return lib;
}

void validate_or_throw(dsl::TaskLibrary& lib, const dsl::ValidationContext& ctx,
                       const std::string& label) {
  std::vector<Diagnostic> diags = dsl::validate(lib, ctx);
  if (lib.validated) return;
  std::string detail = label;
  for (const Diagnostic& diag : diags) {
    if (diag.severity != Severity::Error) continue;
    detail += "\n  " + format_diagnostic(diag);
  }
  throw LoadError("VALIDATION_FAILED", detail);
}

void check_fault_plan_names(const FaultInjectionPlan& plan) {
  const std::vector<std::string>& names = mock_action_names();
  auto known = [&](const std::string& action) {
    return std::find(names.begin(), names.end(), action) != names.end();
  };
  for (const auto& entry : plan.deterministic)
    if (!known(entry.action))
      throw LoadError("UNKNOWN_TARGET", "fault plan names unknown action " + entry.action);
  for (const auto& [action, p] : plan.per_action_probability) {
    (void)p;
    if (!known(action))
      throw LoadError("UNKNOWN_TARGET", "fault plan names unknown action " + action);
  }
  for (const auto& [action, pool] : plan.signal_pools) {
    if (!known(action))
      throw LoadError("UNKNOWN_TARGET", "fault plan names unknown action " + action);
    const std::vector<std::string>& vocab = injectable_signals(action);
    for (const std::string& signal : pool)
      if (std::find(vocab.begin(), vocab.end(), signal) == vocab.end())
        throw LoadError("STRUCTURE_ERROR",
                        "signal pool for " + action + " lists " + signal +
                            ", which that action cannot draw");
  }
}

void check_rule_db_refs(const monitor::RuleSet& rules, const knowledge::Database& db) {
  for (const auto& rule : rules.rules)
    for (const auto& [name, source] : rule.recovery_params)
      if (source.kind == monitor::RecoveryParam::Kind::DbRef && !db.has(source.key))
        throw LoadError("UNKNOWN_KEY", "rule " + rule.id + " param " + name +
                                           " reads db." + source.key +
                                           ", which the database does not hold");
}

}  // namespace

ScenarioDocuments load_scenario_documents(const ScenarioConfig& config) {
  ScenarioDocuments docs;
  docs.recipes = load_merged(config.recipe_paths);
  docs.recoveries = load_merged(config.recovery_paths);

  ScenarioBundle bundle = build_world_file(config.scenario_path);
  docs.world = std::move(bundle.world);

  bool have_db = !config.db_path.empty() || bundle.db.has_value();
  if (!config.db_path.empty())
    docs.db = knowledge::load_database_file(config.db_path);
  else if (bundle.db)
    docs.db = std::move(*bundle.db);

  if (!config.beliefs_path.empty())
    docs.beliefs = knowledge::load_belief_schema_file(config.beliefs_path);
  else if (bundle.beliefs)
    docs.beliefs = std::move(*bundle.beliefs);

  dsl::ValidationContext ctx;
  {
    exec::ActionRegistry signatures;
    register_mock_actions(signatures, std::make_shared<SimContext>());
    exec::register_builtin_ops(signatures);
    signatures.fill_validation_context(ctx);
  }
  ctx.db_keys = docs.db.keys();
  ctx.check_db_keys = have_db;

  validate_or_throw(docs.recipes, ctx, "recipes");
  validate_or_throw(docs.recoveries, ctx, "recovery recipes");

  const dsl::TaskDefinition* root = docs.recipes.find(config.root_task);
  if (root == nullptr)
    throw LoadError("UNKNOWN_ROOT", "root task " + config.root_task + " is not defined");
  if (!root->params.empty())
    throw LoadError("ARITY_MISMATCH", "root task " + config.root_task +
                                          " declares params; scenario runs supply none");

  if (config.rules_path)
    docs.rules = monitor::load_rules_file(*config.rules_path, docs.recoveries,
                                          docs.beliefs.keys());
  check_rule_db_refs(docs.rules, docs.db);

  if (config.fault_plan_path) {
    docs.plan = load_fault_plan_file(*config.fault_plan_path);
    check_fault_plan_names(docs.plan);
  }
  return docs;
}

ScenarioResult run_scenario(const ScenarioDocuments& docs, const std::string& root,
                            std::uint64_t seed, const monitor::SupervisorConfig& supervisor) {
  auto sim = std::make_shared<SimContext>();
  sim->world = docs.world;
  sim->plan = docs.plan;
  sim->run_seed = seed;

  exec::ActionRegistry registry;
  register_mock_actions(registry, sim);
  exec::register_builtin_ops(registry);

  knowledge::BeliefState beliefs = docs.beliefs;

  ScenarioResult result;
  result.session =
      monitor::run_supervised(docs.recipes, root, Value::object(), docs.rules,
                              docs.recoveries, registry, docs.db, beliefs, result.trace,
                              supervisor);
  result.stats = monitor::report(result.trace);
  result.final_world = sim->world;
  return result;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  ScenarioDocuments docs = load_scenario_documents(config);
  ScenarioResult result = run_scenario(docs, config.root_task, config.seed, config.supervisor);
  // The documents die with this call; the frames' borrowed step pointers
  // must not outlive them. Frame shapes stay inspectable.
  for (exec::Frame& frame : result.session.stack) {
    frame.steps = nullptr;
    frame.owner_step = nullptr;
  }
  return result;
}

}  // namespace rtask::sim
