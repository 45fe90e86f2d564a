// Shared scaffolding for the test suites: scripted probe actions, small
// registries, and validation shortcuts.
#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rtask/diagnostics.hpp"
#include "rtask/dsl/parser.hpp"
#include "rtask/dsl/validate.hpp"
#include "rtask/errors.hpp"
#include "rtask/exec/action.hpp"
#include "rtask/exec/engine.hpp"
#include "rtask/exec/trace.hpp"
#include "rtask/knowledge/beliefs.hpp"
#include "rtask/knowledge/database.hpp"
#include "rtask/value.hpp"

namespace rtest {

using rtask::Value;

// Successful leaf executions in invocation order.
struct ProbeLog {
  std::vector<std::string> executed;
};

// Registers a parameterless action that records each success into `log` and
// aborts on the listed per-action ordinals.
inline void add_probe(rtask::exec::ActionRegistry& reg, std::shared_ptr<ProbeLog> log,
                      const std::string& name, std::set<std::uint64_t> abort_ordinals = {},
                      std::string signal = "PROBE_FAULT") {
  rtask::exec::ActionHandler h;
  h.name = name;
  h.execute = [log, name, abort_ordinals = std::move(abort_ordinals),
               signal = std::move(signal)](const Value&, rtask::exec::ActionRuntime& rt) {
    if (abort_ordinals.count(rt.ordinal)) return rtask::exec::ActionResult::abort(signal);
    log->executed.push_back(name);
    return rtask::exec::ActionResult::success();
  };
  reg.register_action(std::move(h));
}

// Registers an action with one required param `value` and one output `out`
// that echoes its input.
inline void add_echo(rtask::exec::ActionRegistry& reg, const std::string& name) {
  rtask::exec::ActionHandler h;
  h.name = name;
  h.signature.required_params = {"value"};
  h.signature.outputs = {"out"};
  h.execute = [](const Value& params, rtask::exec::ActionRuntime&) {
    return rtask::exec::ActionResult::success({{"out", params.at("value")}});
  };
  reg.register_action(std::move(h));
}

// Registers an action with no params whose outputs are fixed.
inline void add_emitter(rtask::exec::ActionRegistry& reg, const std::string& name,
                        std::vector<std::string> output_names, Value outputs) {
  rtask::exec::ActionHandler h;
  h.name = name;
  h.signature.outputs = std::move(output_names);
  h.execute = [outputs = std::move(outputs)](const Value&, rtask::exec::ActionRuntime&) {
    return rtask::exec::ActionResult::success(outputs);
  };
  reg.register_action(std::move(h));
}

inline rtask::dsl::ValidationContext context_for(const rtask::exec::ActionRegistry& reg,
                                                 std::set<std::string> db_keys = {},
                                                 bool check_db = false) {
  rtask::dsl::ValidationContext ctx;
  reg.fill_validation_context(ctx);
  ctx.db_keys = std::move(db_keys);
  ctx.check_db_keys = check_db;
  return ctx;
}

// Parses and validates against `reg`; the library must come back clean.
inline rtask::dsl::TaskLibrary parse_valid(const std::string& text,
                                           const rtask::exec::ActionRegistry& reg) {
  auto lib = rtask::dsl::parse_recipe(text);
  auto diags = rtask::dsl::validate(lib, context_for(reg));
  if (!lib.validated) {
    std::string all;
    for (const auto& d : diags) all += rtask::format_diagnostic(d) + "\n";
    throw rtask::LoadError("VALIDATION_FAILED", "test recipe invalid:\n" + all);
  }
  return lib;
}

// Owns everything an Engine borrows.
struct EngineFixture {
  rtask::dsl::TaskLibrary lib;
  rtask::exec::ActionRegistry reg;
  rtask::knowledge::Database db;
  rtask::knowledge::BeliefState beliefs;
  rtask::exec::Trace trace;
  std::shared_ptr<ProbeLog> log = std::make_shared<ProbeLog>();
};

}  // namespace rtest
