#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "rtask/dsl/ast.hpp"
#include "rtask/dsl/parser.hpp"
#include "rtask/dsl/serialize.hpp"
#include "rtask/dsl/validate.hpp"
#include "rtask/errors.hpp"

using namespace rtask;
using namespace rtask::dsl;

namespace {

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

// Signatures matching the mock catalog entries the listing references.
void make_listing_registry(exec::ActionRegistry& reg) {
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

std::vector<std::string> leaf_targets(const ExpandedNode& node) {
  std::vector<std::string> out;
  if (node.children.empty() && node.kind == StepKind::Action) out.push_back(node.target);
  for (const auto& child : node.children) {
    auto sub = leaf_targets(child);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

bool has_error(const std::vector<Diagnostic>& diags, const std::string& code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) {
    return d.severity == Severity::Error && d.code == code;
  });
}

bool has_warning(const std::vector<Diagnostic>& diags, const std::string& code) {
  return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) {
    return d.severity == Severity::Warning && d.code == code;
  });
}

}  // namespace

TEST_CASE("listing tasks parse into the documented structure") {
  TaskLibrary lib = parse_recipe(kListingText);
  REQUIRE(lib.definitions.size() == 2);

  const TaskDefinition* detect = lib.find("detect_schunk_pose_task");
  REQUIRE(detect != nullptr);
  CHECK(detect->params == std::vector<std::string>{"look_location"});
  CHECK(detect->vars == std::vector<std::string>{"chuck_approach_pose"});
  REQUIRE(detect->steps.size() == 2);
  const Step& look = detect->steps[0];
  CHECK(look.kind == StepKind::Action);
  CHECK(look.name == "look");
  CHECK(look.target == "look");
  REQUIRE(look.params.size() == 1);
  CHECK(look.params[0].first == "pose");
  CHECK(look.params[0].second == Expression::make_param_ref("look_location"));
  const Step& schunk = detect->steps[1];
  CHECK(schunk.target == "detect_schunk");
  CHECK(schunk.params.empty());
  CHECK(schunk.var == std::vector<std::string>{"chuck_approach_pose"});

  const TaskDefinition* pick = lib.find("pick_task");
  REQUIRE(pick != nullptr);
  CHECK(pick->params == std::vector<std::string>{"object_idx", "grasps", "object_key"});
  CHECK(pick->vars == std::vector<std::string>{"grasped"});
  REQUIRE(pick->steps.size() == 2);
  REQUIRE(pick->steps[0].params.size() == 3);
  CHECK(pick->steps[0].params[0].second == Expression::make_param_ref("object_idx"));
  CHECK(pick->steps[0].params[1].second == Expression::make_param_ref("grasps"));
  CHECK(pick->steps[0].params[2].second == Expression::make_param_ref("object_key"));
  const Step& verify = pick->steps[1];
  REQUIRE(verify.params.size() == 1);
  CHECK(verify.params[0].first == "abort_on_false");
  CHECK(verify.params[0].second == Expression::make_literal(Value(false)));
  CHECK(verify.var == std::vector<std::string>{"grasped"});
}

TEST_CASE("listing tasks validate cleanly against the action signatures") {
  TaskLibrary lib = parse_recipe(kListingText);
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  auto diags = validate(lib, rtest::context_for(reg));
  CHECK(!has_errors(diags));
  CHECK(lib.validated);
}

TEST_CASE("listing tasks expand to depth-2 trees with the documented leaves") {
  TaskLibrary lib = parse_recipe(kListingText);
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  validate(lib, rtest::context_for(reg));

  ExpandedNode pick = expand_tree(lib, "pick_task");
  CHECK(count_nodes(pick) == 3);
  CHECK(leaf_targets(pick) == std::vector<std::string>{"pick", "verify_grasp"});

  ExpandedNode detect = expand_tree(lib, "detect_schunk_pose_task");
  CHECK(count_nodes(detect) == 3);
  CHECK(leaf_targets(detect) == std::vector<std::string>{"look", "detect_schunk"});

  std::string dot = expand_tree_to_dot(pick);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("pick") != std::string::npos);
  CHECK(dot.find("verify_grasp") != std::string::npos);
}

TEST_CASE("listing round trip preserves structure") {
  TaskLibrary lib = parse_recipe(kListingText);
  std::string emitted = serialize_library(lib);
  TaskLibrary reparsed = parse_recipe(emitted);
  CHECK(lib.same_structure(reparsed));
  CHECK(serialize_library(reparsed) == emitted);
}

TEST_CASE("param values split into references and literals") {
  TaskLibrary lib = parse_recipe(R"(demo:
  params: [station]
  var: [spot]
  steps:
  - op: seed
    target: assign
    params: {value: 1}
    var: [spot]
  - action: goto
    target: navigate
    params:
      waypoint: params.station
      hint: var.spot
      pose: db.poses.default
      label: "kit_station"
      escaped: "params.fake"
      speed: 0.5
      attempts: 3
      careful: true
      extra: null
)");
  const Step& goto_step = lib.find("demo")->steps[1];
  REQUIRE(goto_step.params.size() == 9);
  auto param = [&](const std::string& name) -> const Expression& {
    for (const auto& [n, e] : goto_step.params)
      if (n == name) return e;
    throw std::runtime_error("missing param " + name);
  };
  CHECK(param("waypoint") == Expression::make_param_ref("station"));
  CHECK(param("hint") == Expression::make_var_ref("spot"));
  CHECK(param("pose") == Expression::make_db_ref("poses.default"));
  CHECK(param("label") == Expression::make_literal(Value("kit_station")));
  CHECK(param("escaped") == Expression::make_literal(Value("params.fake")));
  CHECK(param("speed") == Expression::make_literal(Value(0.5)));
  CHECK(param("attempts") == Expression::make_literal(Value(3)));
  CHECK(param("careful") == Expression::make_literal(Value(true)));
  CHECK(param("extra").kind == ExprKind::Literal);
  CHECK(param("extra").literal.is_null());
}

TEST_CASE("unknown keys are warnings, not errors") {
  std::vector<Diagnostic> warnings;
  TaskLibrary lib = parse_recipe(R"(demo:
  comment: keep
  steps:
  - action: ping
    retries: 3
)",
                                 &warnings);
  CHECK(lib.has("demo"));
  REQUIRE(warnings.size() == 2);
  CHECK(has_warning(warnings, "UNKNOWN_KEY"));
  CHECK(warnings[0].severity == Severity::Warning);
}

TEST_CASE("malformed steps fail with STRUCTURE_ERROR") {
  auto code_of = [](const std::string& text) {
    try {
      parse_recipe(text);
      return std::string("(no error)");
    } catch (const LoadError& e) {
      return e.code();
    }
  };
  CHECK(code_of("demo:\n  steps:\n  - action: a\n    task: b\n") == "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  steps:\n  - params: {}\n") == "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  steps:\n  - choice: c\n    if_true:\n    - action: a\n") ==
        "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  steps:\n  - choice: c\n    condition: \"1 == 1\"\n") ==
        "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  steps:\n  - loop: l\n    condition: \"1 == 1\"\n") == "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  steps:\n  - choice: c\n    condition: \"1 == 1\"\n    params: {x: 1}\n"
                "    if_true:\n    - action: a\n") == "STRUCTURE_ERROR");
  CHECK(code_of("- action: a\n") == "STRUCTURE_ERROR");
  CHECK(code_of("demo:\n  var: {x: 1}\n  steps:\n  - action: a\n") == "STRUCTURE_ERROR");
}

TEST_CASE("merge_libraries keeps disjoint tasks and rejects duplicates") {
  TaskLibrary base = parse_recipe("alpha:\n  steps:\n  - action: a\n");
  TaskLibrary extra = parse_recipe("beta:\n  steps:\n  - action: b\n");
  merge_libraries(base, extra);
  CHECK(base.has("alpha"));
  CHECK(base.has("beta"));

  TaskLibrary clash = parse_recipe("alpha:\n  steps:\n  - action: c\n");
  bool threw = false;
  try {
    merge_libraries(base, clash);
  } catch (const LoadError& e) {
    threw = true;
    CHECK(e.code() == "DUPLICATE_TASK");
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("condition grammar: operators, precedence, exists") {
  Expression e = parse_condition("var.grasped == false");
  CHECK(e == Expression::make_compare(CompareOp::Eq, Expression::make_var_ref("grasped"),
                                      Expression::make_literal(Value(false))));

  Expression prec = parse_condition("not var.a and params.b <= 3 or db.c.d > 2.5");
  REQUIRE(prec.kind == ExprKind::BoolOp);
  CHECK(prec.bop == BoolOpKind::Or);
  REQUIRE(prec.operands.size() == 2);
  const Expression& left = prec.operands[0];
  CHECK(left.bop == BoolOpKind::And);
  CHECK(left.operands[0].bop == BoolOpKind::Not);
  CHECK(left.operands[1].cmp == CompareOp::Le);
  CHECK(prec.operands[1].cmp == CompareOp::Gt);
  CHECK(prec.operands[1].operands[0] == Expression::make_db_ref("c.d"));

  Expression grouped = parse_condition("not (var.a or var.b)");
  CHECK(grouped.bop == BoolOpKind::Not);
  CHECK(grouped.operands[0].bop == BoolOpKind::Or);

  Expression ex = parse_condition("exists(db.poses.bin_look)");
  CHECK(ex == Expression::make_exists(Expression::make_db_ref("poses.bin_look")));

  CHECK(parse_condition("params.x != 'left'") ==
        Expression::make_compare(CompareOp::Ne, Expression::make_param_ref("x"),
                                 Expression::make_literal(Value("left"))));
  CHECK(parse_condition("var.n >= 4").cmp == CompareOp::Ge);
  CHECK(parse_condition("var.n < 4").cmp == CompareOp::Lt);
  CHECK(parse_condition("var.x == null").operands[1].literal.is_null());
}

TEST_CASE("condition grammar rejects bare words and broken syntax") {
  auto code_of = [](const std::string& text) {
    try {
      parse_condition(text);
      return std::string("(no error)");
    } catch (const LoadError& e) {
      return e.code();
    }
  };
  CHECK(code_of("grasped == false") == "SYNTAX_ERROR");
  CHECK(code_of("var.x == 'unterminated") == "SYNTAX_ERROR");
  CHECK(code_of("var.x = 3") == "SYNTAX_ERROR");
  CHECK(code_of("var.x == 3 extra") == "SYNTAX_ERROR");
  CHECK(code_of("exists(waypoint)") == "SYNTAX_ERROR");
  CHECK(code_of("(var.x == 3") == "SYNTAX_ERROR");
}

TEST_CASE("expression rendering parses back to the same tree") {
  for (const char* text :
       {"var.grasped == false", "not (var.a or var.b) and params.c >= 0.5",
        "exists(db.poses.bin_look) and db.limits.max > 2", "params.key != 'slot one'"}) {
    Expression e = parse_condition(text);
    CHECK(parse_condition(expression_to_string(e)) == e);
  }
}

TEST_CASE("validator flags unknown targets and arity problems") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);

  TaskLibrary lib = parse_recipe(R"(demo:
  steps:
  - action: warp
)");
  CHECK(has_error(validate(lib, rtest::context_for(reg)), "UNKNOWN_TARGET"));

  TaskLibrary missing = parse_recipe(R"(demo:
  steps:
  - action: look
)");
  CHECK(has_error(validate(missing, rtest::context_for(reg)), "ARITY_MISMATCH"));

  TaskLibrary extra = parse_recipe(R"(demo:
  steps:
  - action: look
    params: {pose: 1, zoom: 2}
)");
  CHECK(has_error(validate(extra, rtest::context_for(reg)), "ARITY_MISMATCH"));

  TaskLibrary overflow = parse_recipe(R"(demo:
  var: [a, b]
  steps:
  - action: detect_schunk
    var: [a, b]
)");
  CHECK(has_error(validate(overflow, rtest::context_for(reg)), "ARITY_MISMATCH"));
}

TEST_CASE("validator enforces exact task param cover in both directions") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary under = parse_recipe(R"(callee:
  params: [a, b]
  steps:
  - action: detect_schunk
demo:
  steps:
  - task: callee
    params: {a: 1}
)");
  CHECK(has_error(validate(under, rtest::context_for(reg)), "ARITY_MISMATCH"));

  TaskLibrary over = parse_recipe(R"(callee:
  params: [a]
  steps:
  - action: detect_schunk
demo:
  steps:
  - task: callee
    params: {a: 1, b: 2}
)");
  CHECK(has_error(validate(over, rtest::context_for(reg)), "ARITY_MISMATCH"));
}

TEST_CASE("validator catches variable misuse") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);

  TaskLibrary undeclared = parse_recipe(R"(demo:
  steps:
  - action: detect_schunk
    var: [pose]
)");
  CHECK(has_error(validate(undeclared, rtest::context_for(reg)), "UNDECLARED_VAR"));

  TaskLibrary early = parse_recipe(R"(demo:
  var: [pose]
  steps:
  - action: look
    params: {pose: var.pose}
  - action: detect_schunk
    var: [pose]
)");
  CHECK(has_error(validate(early, rtest::context_for(reg)), "USE_BEFORE_DEF"));

  TaskLibrary unknown_param = parse_recipe(R"(demo:
  params: [target]
  steps:
  - action: look
    params: {pose: params.spot}
)");
  CHECK(has_error(validate(unknown_param, rtest::context_for(reg)), "UNKNOWN_PARAM"));
}

TEST_CASE("loop bodies do not count as definitely bound afterwards") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary lib = parse_recipe(R"(demo:
  var: [pose, seen]
  steps:
  - loop: hunt
    condition: "exists(var.pose) == false"
    body:
    - action: detect_schunk
      var: [pose]
  - action: look
    params: {pose: var.pose}
)");
  CHECK(has_error(validate(lib, rtest::context_for(reg)), "USE_BEFORE_DEF"));
}

TEST_CASE("choice joins require both branches to bind a var before later reads") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary one_side = parse_recipe(R"(demo:
  params: [mode]
  var: [pose]
  steps:
  - choice: route
    condition: "params.mode == 'scan'"
    if_true:
    - action: detect_schunk
      var: [pose]
    if_false:
    - action: verify_grasp
      params: {abort_on_false: false}
  - action: look
    params: {pose: var.pose}
)");
  CHECK(has_error(validate(one_side, rtest::context_for(reg)), "USE_BEFORE_DEF"));

  TaskLibrary both_sides = parse_recipe(R"(demo:
  params: [mode]
  var: [pose]
  steps:
  - choice: route
    condition: "params.mode == 'scan'"
    if_true:
    - action: detect_schunk
      var: [pose]
    if_false:
    - action: second
      target: detect_schunk
      var: [pose]
  - action: look
    params: {pose: var.pose}
)");
  auto diags = validate(both_sides, rtest::context_for(reg));
  CHECK(!has_errors(diags));
}

TEST_CASE("validator reports cycles, duplicate steps, and db keys") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);

  TaskLibrary cycle = parse_recipe(R"(ping:
  steps:
  - task: pong
pong:
  steps:
  - task: ping
)");
  CHECK(has_error(validate(cycle, rtest::context_for(reg)), "RECURSIVE_TASK"));

  TaskLibrary dup = parse_recipe(R"(demo:
  steps:
  - action: one
    target: detect_schunk
  - action: one
    target: detect_schunk
)");
  CHECK(has_error(validate(dup, rtest::context_for(reg)), "DUPLICATE_STEP"));

  TaskLibrary dbref = parse_recipe(R"(demo:
  steps:
  - action: look
    params: {pose: db.poses.missing}
)");
  CHECK(has_error(validate(dbref, rtest::context_for(reg, {"poses.bin_look"}, true)),
                  "UNKNOWN_DB_KEY"));
  TaskLibrary dbref_unchecked = parse_recipe(R"(demo:
  steps:
  - action: look
    params: {pose: db.poses.missing}
)");
  CHECK(!has_errors(validate(dbref_unchecked, rtest::context_for(reg))));
}

TEST_CASE("literal conditions earn UNREACHABLE_STEP warnings but still validate") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary lib = parse_recipe(R"(demo:
  steps:
  - choice: fixed
    condition: "true"
    if_true:
    - action: detect_schunk
    if_false:
    - action: dead
      target: detect_schunk
  - loop: never
    condition: "false"
    body:
    - action: spin
      target: detect_schunk
)");
  auto diags = validate(lib, rtest::context_for(reg));
  CHECK(has_warning(diags, "UNREACHABLE_STEP"));
  CHECK(!has_errors(diags));
  CHECK(lib.validated);
}

TEST_CASE("expansion numbers repeated targets and labels branches") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary lib = parse_recipe(R"(scan_once:
  steps:
  - action: detect_schunk
demo:
  params: [mode]
  steps:
  - task: first
    target: scan_once
  - task: second
    target: scan_once
  - choice: route
    condition: "params.mode == 'deep'"
    if_true:
    - action: detect_schunk
    if_false:
    - loop: wait
      condition: "params.mode == 'shallow'"
      body:
      - action: probe
        target: detect_schunk
)");
  auto diags = validate(lib, rtest::context_for(reg));
  REQUIRE(!has_errors(diags));

  ExpandedNode root = expand_tree(lib, "demo");
  REQUIRE(root.children.size() == 3);
  CHECK(root.children[0].target == "scan_once");
  CHECK(root.children[0].ordinal == 1);
  CHECK(root.children[1].ordinal == 2);
  const ExpandedNode& choice = root.children[2];
  CHECK(choice.kind == StepKind::Choice);
  REQUIRE(choice.children.size() == 2);
  CHECK(choice.children[0].branch == "T");
  CHECK(choice.children[1].branch == "F");
  const ExpandedNode& loop = choice.children[1];
  CHECK(loop.kind == StepKind::Loop);
  REQUIRE(loop.children.size() == 1);
  CHECK(loop.children[0].branch == "B");

  CHECK_THROWS_AS(expand_tree(lib, "nowhere"), LoadError);
}

TEST_CASE("serializer round-trips a library exercising every step kind") {
  exec::ActionRegistry reg;
  make_listing_registry(reg);
  TaskLibrary lib = parse_recipe(R"(helper:
  params: [pose_in]
  var: [pose]
  steps:
  - action: look
    params: {pose: params.pose_in}
  - action: detect_schunk
    var: [pose]
demo:
  params: [mode, spot]
  var: [pose, count, flag]
  steps:
  - op: zero
    target: assign
    params: {value: 0}
    var: [count]
  - op: off
    target: assign
    params: {value: false}
    var: [flag]
  - task: first_scan
    target: helper
    params: {pose_in: params.spot}
    var: [pose]
  - choice: route
    condition: "params.mode == 'deep' and var.count <= 2"
    if_true:
    - action: look
      params: {pose: var.pose}
    if_false:
    - loop: wait
      condition: "var.flag == false"
      body:
      - action: probe
        target: verify_grasp
        params: {abort_on_false: "params.fake"}
        var: [flag]
)");
  auto diags = validate(lib, rtest::context_for(reg));
  REQUIRE(!has_errors(diags));

  std::string once = serialize_library(lib);
  TaskLibrary back = parse_recipe(once);
  CHECK(lib.same_structure(back));
  CHECK(serialize_library(back) == once);

  const Step& probe = back.find("demo")->steps[3].if_false[0].body[0];
  CHECK(probe.params[0].second == Expression::make_literal(Value("params.fake")));
}
