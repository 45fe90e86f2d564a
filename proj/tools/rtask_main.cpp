// rtask: run supervised scenarios, lint recipes, test units in isolation,
// and expand task trees to DOT.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "rtask/dsl/parser.hpp"
#include "rtask/dsl/validate.hpp"
#include "rtask/errors.hpp"
#include "rtask/exec/engine.hpp"
#include "rtask/monitor/supervisor.hpp"
#include "rtask/sim/scenario.hpp"

namespace {

using rtask::LoadError;

constexpr int kExitSuccess = 0;
constexpr int kExitTaskFailed = 1;
constexpr int kExitLoadError = 2;

struct CommonOptions {
  std::vector<std::string> recipes;
  std::vector<std::string> recoveries;
  std::string rules;
  std::string db;
  std::string beliefs;
  std::string scenario;
  std::string faults;
  std::string root = "main_task";
  std::optional<std::uint64_t> seed;
  std::string unseen_policy;
  std::string trace_out;
  std::string report_out;
  std::string config_file;
  int verbosity = 0;
};

void add_document_flags(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--recipes", opts.recipes, "Recipe files (repeatable)");
  cmd->add_option("--recoveries", opts.recoveries, "Recovery recipe files (repeatable)");
  cmd->add_option("--rules", opts.rules, "Recovery rule file");
  cmd->add_option("--db", opts.db, "Database file");
  cmd->add_option("--beliefs", opts.beliefs, "Belief schema file");
  cmd->add_option("--scenario", opts.scenario, "World scenario file");
  cmd->add_option("--faults", opts.faults, "Fault injection plan");
  cmd->add_option("--seed", opts.seed, "Run seed (beats RDD_SEED and the config file)");
  cmd->add_option("--unseen-policy", opts.unseen_policy,
                  "ALWAYS_EXIT or RETRY_ONCE_THEN_EXIT");
  cmd->add_option("--trace-out", opts.trace_out, "Write the JSONL trace here");
  cmd->add_option("--report-out", opts.report_out, "Write the stats report (JSON) here");
  cmd->add_option("--config", opts.config_file, "YAML config supplying any of these flags");
  cmd->add_flag("-v,--verbose", opts.verbosity, "Print the report and final world state");
}

std::vector<std::string> yaml_string_list(const YAML::Node& node) {
  std::vector<std::string> out;
  if (node.IsScalar()) {
    out.push_back(node.as<std::string>());
  } else if (node.IsSequence()) {
    for (const auto& item : node) out.push_back(item.as<std::string>());
  } else {
    throw LoadError("TYPE_ERROR", "expected a path or list of paths");
  }
  return out;
}

// Fills only the fields the command line left unset; flags override the file.
void apply_config_file(CommonOptions& opts) {
  if (opts.config_file.empty()) return;
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(opts.config_file);
  } catch (const YAML::Exception& e) {
    throw LoadError("SYNTAX_ERROR", opts.config_file + ": " + e.what());
  }
  if (!doc.IsMap()) throw LoadError("STRUCTURE_ERROR", opts.config_file + ": expected a map");
  for (const auto& item : doc) {
    std::string key = item.first.as<std::string>();
    const YAML::Node& value = item.second;
    if (key == "recipes") {
      if (opts.recipes.empty()) opts.recipes = yaml_string_list(value);
    } else if (key == "recoveries") {
      if (opts.recoveries.empty()) opts.recoveries = yaml_string_list(value);
    } else if (key == "rules") {
      if (opts.rules.empty()) opts.rules = value.as<std::string>();
    } else if (key == "db") {
      if (opts.db.empty()) opts.db = value.as<std::string>();
    } else if (key == "beliefs") {
      if (opts.beliefs.empty()) opts.beliefs = value.as<std::string>();
    } else if (key == "scenario") {
      if (opts.scenario.empty()) opts.scenario = value.as<std::string>();
    } else if (key == "faults") {
      if (opts.faults.empty()) opts.faults = value.as<std::string>();
    } else if (key == "root") {
      if (opts.root == "main_task") opts.root = value.as<std::string>();
    } else if (key == "seed") {
      if (!opts.seed && !std::getenv("RDD_SEED")) opts.seed = value.as<std::uint64_t>();
    } else if (key == "unseen_policy") {
      if (opts.unseen_policy.empty()) opts.unseen_policy = value.as<std::string>();
    } else if (key == "trace_out") {
      if (opts.trace_out.empty()) opts.trace_out = value.as<std::string>();
    } else if (key == "report_out") {
      if (opts.report_out.empty()) opts.report_out = value.as<std::string>();
    } else {
      throw LoadError("STRUCTURE_ERROR", opts.config_file + ": unknown config key " + key);
    }
  }
}

std::uint64_t resolve_seed(const CommonOptions& opts) {
  if (opts.seed) return *opts.seed;
  if (const char* env = std::getenv("RDD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw LoadError("TYPE_ERROR", std::string("RDD_SEED is not an integer: ") + env);
    }
  }
  return 0;
}

rtask::sim::ScenarioConfig to_scenario_config(CommonOptions& opts) {
  apply_config_file(opts);
  rtask::sim::ScenarioConfig config;
  config.recipe_paths = opts.recipes;
  config.recovery_paths = opts.recoveries;
  if (!opts.rules.empty()) config.rules_path = opts.rules;
  config.db_path = opts.db;
  config.beliefs_path = opts.beliefs;
  config.scenario_path = opts.scenario;
  if (!opts.faults.empty()) config.fault_plan_path = opts.faults;
  config.root_task = opts.root;
  config.seed = resolve_seed(opts);
  if (!opts.unseen_policy.empty())
    config.supervisor.unseen_policy = rtask::monitor::parse_unseen_policy(opts.unseen_policy);
  return config;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("IO_ERROR", "cannot write " + path);
  out << text;
}

int cmd_run(CommonOptions& opts) {
  rtask::sim::ScenarioResult result;
  try {
    result = rtask::sim::run_scenario(to_scenario_config(opts));
    if (!opts.trace_out.empty()) result.trace.write_jsonl_file(opts.trace_out);
    if (!opts.report_out.empty())
      write_text_file(opts.report_out, result.stats.to_json().dump(2) + "\n");
  } catch (const LoadError& e) {
    std::cerr << "rtask run: " << e.what() << "\n";
    return kExitLoadError;
  }
  const auto& session = result.session;
  std::cout << "status=" << rtask::exec::session_status_name(session.status)
            << " events=" << result.trace.size()
            << " recoveries=" << result.stats.recovery_events << "\n";
  if (session.fault) std::cout << session.fault->to_json().dump(2) << "\n";
  if (opts.verbosity > 0) {
    std::cout << result.stats.to_text();
    std::cout << result.final_world.to_json().dump(2) << "\n";
  }
  return session.status == rtask::exec::SessionStatus::Succeeded ? kExitSuccess
                                                                 : kExitTaskFailed;
}

int cmd_lint(CommonOptions& opts) {
  try {
    apply_config_file(opts);
    if (opts.recipes.empty()) throw LoadError("STRUCTURE_ERROR", "lint needs --recipes");
    rtask::dsl::TaskLibrary merged;
    std::map<std::string, std::string> task_file;
    std::vector<std::pair<std::string, rtask::Diagnostic>> findings;
    for (const std::string& path : opts.recipes) {
      std::vector<rtask::Diagnostic> parse_warnings;
      rtask::dsl::TaskLibrary part = rtask::dsl::parse_recipe_file(path, &parse_warnings);
      for (const auto& diag : parse_warnings) findings.emplace_back(path, diag);
      for (const auto& [name, def] : part.definitions) {
        (void)def;
        task_file[name] = path;
      }
      rtask::dsl::merge_libraries(merged, part);
    }

    rtask::dsl::ValidationContext ctx;
    {
      rtask::exec::ActionRegistry signatures;
      rtask::sim::register_mock_actions(signatures,
                                        std::make_shared<rtask::sim::SimContext>());
      rtask::exec::register_builtin_ops(signatures);
      signatures.fill_validation_context(ctx);
    }
    if (!opts.db.empty()) {
      ctx.db_keys = rtask::knowledge::load_database_file(opts.db).keys();
    } else {
      ctx.check_db_keys = false;
    }

    std::vector<rtask::Diagnostic> diags = rtask::dsl::validate(merged, ctx);
    for (const auto& diag : diags) {
      auto it = task_file.find(diag.task);
      findings.emplace_back(it == task_file.end() ? "<merged>" : it->second, diag);
    }
    bool errors = false;
    for (const auto& [file, diag] : findings) {
      std::cout << file << ": " << rtask::format_diagnostic(diag) << "\n";
      errors = errors || diag.severity == rtask::Severity::Error;
    }
    return errors ? kExitTaskFailed : kExitSuccess;
  } catch (const LoadError& e) {
    std::cerr << "rtask lint: " << e.what() << "\n";
    return kExitLoadError;
  }
}

int cmd_test_unit(CommonOptions& opts, const std::string& unit, const std::string& input_path) {
  try {
    apply_config_file(opts);
    rtask::dsl::TaskLibrary lib;
    for (const std::string& path : opts.recipes)
      rtask::dsl::merge_libraries(lib, rtask::dsl::parse_recipe_file(path));
    for (const std::string& path : opts.recoveries)
      rtask::dsl::merge_libraries(lib, rtask::dsl::parse_recipe_file(path));

    auto sim = std::make_shared<rtask::sim::SimContext>();
    if (!opts.scenario.empty()) sim->world = rtask::sim::build_world_file(opts.scenario).world;
    if (!opts.faults.empty()) sim->plan = rtask::sim::load_fault_plan_file(opts.faults);
    sim->run_seed = resolve_seed(opts);

    rtask::exec::ActionRegistry registry;
    rtask::sim::register_mock_actions(registry, sim);
    rtask::exec::register_builtin_ops(registry);

    rtask::knowledge::Database db;
    if (!opts.db.empty()) db = rtask::knowledge::load_database_file(opts.db);
    rtask::knowledge::BeliefState beliefs;
    if (!opts.beliefs.empty()) beliefs = rtask::knowledge::load_belief_schema_file(opts.beliefs);

    rtask::dsl::ValidationContext ctx;
    registry.fill_validation_context(ctx);
    ctx.db_keys = db.keys();
    ctx.check_db_keys = !opts.db.empty();
    std::vector<rtask::Diagnostic> diags = rtask::dsl::validate(lib, ctx);
    if (!lib.validated) {
      for (const auto& diag : diags) std::cerr << rtask::format_diagnostic(diag) << "\n";
      return kExitLoadError;
    }

    std::string input = "{}";
    if (!input_path.empty()) {
      std::ifstream in(input_path, std::ios::binary);
      if (!in) throw LoadError("IO_ERROR", "cannot read " + input_path);
      std::ostringstream buffer;
      buffer << in.rdbuf();
      input = buffer.str();
    }

    rtask::exec::Trace trace;
    std::string rendered =
        rtask::exec::execute_unit_isolated(lib, registry, db, beliefs, trace, unit, input);
    std::cout << rendered << "\n";
    if (!opts.trace_out.empty()) trace.write_jsonl_file(opts.trace_out);

    rtask::Value doc = rtask::Value::parse(rendered);
    return doc.value("status", "") == "SUCCEEDED" ? kExitSuccess : kExitTaskFailed;
  } catch (const LoadError& e) {
    std::cerr << "rtask test-unit: " << e.what() << "\n";
    return kExitLoadError;
  }
}

int cmd_expand(CommonOptions& opts, const std::string& root) {
  try {
    apply_config_file(opts);
    rtask::dsl::TaskLibrary lib;
    for (const std::string& path : opts.recipes)
      rtask::dsl::merge_libraries(lib, rtask::dsl::parse_recipe_file(path));
    for (const std::string& path : opts.recoveries)
      rtask::dsl::merge_libraries(lib, rtask::dsl::parse_recipe_file(path));

    rtask::dsl::ValidationContext ctx;
    {
      rtask::exec::ActionRegistry signatures;
      rtask::sim::register_mock_actions(signatures,
                                        std::make_shared<rtask::sim::SimContext>());
      rtask::exec::register_builtin_ops(signatures);
      signatures.fill_validation_context(ctx);
    }
    ctx.check_db_keys = false;
    std::vector<rtask::Diagnostic> diags = rtask::dsl::validate(lib, ctx);
    if (!lib.validated) {
      for (const auto& diag : diags) std::cerr << rtask::format_diagnostic(diag) << "\n";
      return kExitLoadError;
    }
    rtask::dsl::ExpandedNode tree = rtask::dsl::expand_tree(lib, root);
    std::cout << rtask::dsl::expand_tree_to_dot(tree);
    return kExitSuccess;
  } catch (const LoadError& e) {
    std::cerr << "rtask expand: " << e.what() << "\n";
    return kExitLoadError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recipe-task orchestration with rule-driven recovery"};
  app.require_subcommand(1);
  int exit_code = kExitSuccess;

  CommonOptions run_opts;
  CLI::App* run = app.add_subcommand("run", "Run a supervised scenario");
  add_document_flags(run, run_opts);
  run->add_option("--root", run_opts.root, "Root task (default main_task)");
  run->callback([&] { exit_code = cmd_run(run_opts); });

  CommonOptions lint_opts;
  CLI::App* lint = app.add_subcommand("lint", "Validate recipe files");
  add_document_flags(lint, lint_opts);
  lint->callback([&] { exit_code = cmd_lint(lint_opts); });

  CommonOptions unit_opts;
  std::string unit_name;
  std::string unit_input;
  CLI::App* test_unit = app.add_subcommand("test-unit", "Run one action or task in isolation");
  add_document_flags(test_unit, unit_opts);
  test_unit->add_option("unit", unit_name, "Action or task name")->required();
  test_unit->add_option("--input", unit_input, "JSON document binding the unit's params");
  test_unit->callback([&] { exit_code = cmd_test_unit(unit_opts, unit_name, unit_input); });

  CommonOptions expand_opts;
  std::string expand_root;
  CLI::App* expand = app.add_subcommand("expand", "Print the task tree under a root as DOT");
  add_document_flags(expand, expand_opts);
  expand->add_option("root", expand_root, "Root task name")->required();
  expand->callback([&] { exit_code = cmd_expand(expand_opts, expand_root); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitSuccess : kExitLoadError;
  }
  return exit_code;
}
