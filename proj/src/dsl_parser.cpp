#include "rtask/dsl/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"
#include "rtask/value.hpp"

namespace rtask::dsl {

namespace {

[[noreturn]] void fail(const std::string& code, const std::string& message,
                       const YAML::Node& node) {
  throw LoadError(code, message, node.Mark().line, node.Mark().column);
}

bool plain_scalar(const YAML::Node& node) { return node.IsScalar() && node.Tag() != "!"; }

Expression reference_or_literal(const YAML::Node& node) {
  if (node.IsScalar()) {
    const std::string& text = node.Scalar();
    if (plain_scalar(node)) {
      if (text.rfind("params.", 0) == 0) return Expression::make_param_ref(text.substr(7));
      if (text.rfind("var.", 0) == 0) return Expression::make_var_ref(text.substr(4));
      if (text.rfind("db.", 0) == 0) return Expression::make_db_ref(text.substr(3));
    }
    return Expression::make_literal(yaml_scalar_to_value(text, node.Tag() == "!"));
  }
  return Expression::make_literal(yaml_to_value(node));
}

std::vector<std::string> parse_name_list(const YAML::Node& node, const char* what) {
  std::vector<std::string> out;
  if (!node.IsSequence()) fail("STRUCTURE_ERROR", std::string(what) + " must be a sequence", node);
  for (const auto& item : node) {
    if (!item.IsScalar()) fail("STRUCTURE_ERROR", std::string(what) + " entries must be names", item);
    out.push_back(item.Scalar());
  }
  return out;
}

void warn(std::vector<Diagnostic>* warnings, const std::string& task, const std::string& path,
          const std::string& code, const std::string& message) {
  if (warnings)
    warnings->push_back({Severity::Warning, code, message, task, path});
}

const std::set<std::string> kKindKeys = {"action", "task", "op", "choice", "loop"};

StepKind kind_from_key(const std::string& key) {
  if (key == "action") return StepKind::Action;
  if (key == "task") return StepKind::Task;
  if (key == "op") return StepKind::Op;
  if (key == "choice") return StepKind::Choice;
  return StepKind::Loop;
}

std::vector<Step> parse_steps(const YAML::Node& node, const std::string& task,
                              const std::string& path, std::vector<Diagnostic>* warnings);

Step parse_step(const YAML::Node& node, const std::string& task, const std::string& path,
                std::vector<Diagnostic>* warnings) {
  if (!node.IsMap()) fail("STRUCTURE_ERROR", "step must be a mapping", node);

  Step step;
  int kind_keys = 0;
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    if (kKindKeys.count(key)) {
      ++kind_keys;
      if (!kv.second.IsScalar()) fail("STRUCTURE_ERROR", "step name must be a scalar", kv.second);
      step.kind = kind_from_key(key);
      step.name = kv.second.Scalar();
    }
  }
  if (kind_keys == 0)
    fail("STRUCTURE_ERROR", "step has no kind key (action/task/op/choice/loop)", node);
  if (kind_keys > 1) fail("STRUCTURE_ERROR", "step has conflicting kind keys", node);

  const std::string step_path = path.empty() ? step.name : path + "/" + step.name;
  const bool leafish = step.kind == StepKind::Action || step.kind == StepKind::Task ||
                       step.kind == StepKind::Op;
  step.target = leafish ? step.name : "";

  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    if (kKindKeys.count(key)) continue;
    if (key == "target" && leafish) {
      if (!kv.second.IsScalar()) fail("STRUCTURE_ERROR", "target must be a name", kv.second);
      step.target = kv.second.Scalar();
    } else if (key == "params" && leafish) {
      if (!kv.second.IsMap()) fail("STRUCTURE_ERROR", "params must be a mapping", kv.second);
      for (const auto& p : kv.second)
        step.params.emplace_back(p.first.Scalar(), reference_or_literal(p.second));
    } else if (key == "var" && leafish) {
      step.var = parse_name_list(kv.second, "var");
    } else if (key == "condition" && (step.kind == StepKind::Choice || step.kind == StepKind::Loop)) {
      if (!kv.second.IsScalar()) fail("STRUCTURE_ERROR", "condition must be a string", kv.second);
      try {
        step.condition = parse_condition(kv.second.Scalar());
      } catch (const LoadError& e) {
        fail(e.code(), std::string("in condition: ") + e.what(), kv.second);
      }
    } else if (key == "if_true" && step.kind == StepKind::Choice) {
      step.if_true = parse_steps(kv.second, task, step_path, warnings);
    } else if (key == "if_false" && step.kind == StepKind::Choice) {
      step.if_false = parse_steps(kv.second, task, step_path, warnings);
    } else if (key == "body" && step.kind == StepKind::Loop) {
      step.body = parse_steps(kv.second, task, step_path, warnings);
    } else if (key == "target" || key == "params" || key == "var" || key == "condition" ||
               key == "if_true" || key == "if_false" || key == "body") {
      fail("STRUCTURE_ERROR",
           "key '" + key + "' is not allowed on a " + step_kind_name(step.kind) + " step",
           kv.first);
    } else {
      warn(warnings, task, step_path, "UNKNOWN_KEY", "unrecognized step key '" + key + "'");
    }
  }

  if (step.kind == StepKind::Choice) {
    if (!step.condition) fail("STRUCTURE_ERROR", "choice step needs a condition", node);
    if (step.if_true.empty() && step.if_false.empty())
      fail("STRUCTURE_ERROR", "choice step needs a non-empty branch", node);
  }
  if (step.kind == StepKind::Loop) {
    if (!step.condition) fail("STRUCTURE_ERROR", "loop step needs a condition", node);
    if (step.body.empty()) fail("STRUCTURE_ERROR", "loop body must be non-empty", node);
  }
  return step;
}

std::vector<Step> parse_steps(const YAML::Node& node, const std::string& task,
                              const std::string& path, std::vector<Diagnostic>* warnings) {
  if (!node.IsSequence()) fail("STRUCTURE_ERROR", "steps must be a sequence", node);
  std::vector<Step> out;
  for (const auto& item : node) out.push_back(parse_step(item, task, path, warnings));
  return out;
}

TaskDefinition parse_task(const std::string& name, const YAML::Node& node,
                          std::vector<Diagnostic>* warnings) {
  if (!node.IsMap()) fail("STRUCTURE_ERROR", "task body must be a mapping", node);
  TaskDefinition task;
  task.name = name;
  bool saw_steps = false;
  for (const auto& kv : node) {
    const std::string key = kv.first.Scalar();
    if (key == "params") {
      task.params = parse_name_list(kv.second, "params");
    } else if (key == "var") {
      task.vars = parse_name_list(kv.second, "var");
    } else if (key == "steps") {
      saw_steps = true;
      task.steps = parse_steps(kv.second, name, "", warnings);
    } else {
      warn(warnings, name, "", "UNKNOWN_KEY", "unrecognized task key '" + key + "'");
    }
  }
  if (!saw_steps || task.steps.empty())
    fail("STRUCTURE_ERROR", "task '" + name + "' has no steps", node);

  std::set<std::string> seen;
  for (const auto& p : task.params)
    if (!seen.insert(p).second)
      fail("STRUCTURE_ERROR", "duplicate param '" + p + "' in task '" + name + "'", node);
  seen.clear();
  for (const auto& v : task.vars)
    if (!seen.insert(v).second)
      fail("STRUCTURE_ERROR", "duplicate var '" + v + "' in task '" + name + "'", node);
  return task;
}

}  // namespace

TaskLibrary parse_recipe(const std::string& text, std::vector<Diagnostic>* warnings) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }

  TaskLibrary lib;
  if (root.IsNull() || !root.IsDefined()) return lib;
  if (!root.IsMap())
    throw LoadError("STRUCTURE_ERROR", "recipe document must be a map of task definitions",
                    root.Mark().line, root.Mark().column);

  for (const auto& kv : root) {
    const std::string name = kv.first.Scalar();
    if (lib.definitions.count(name))
      fail("STRUCTURE_ERROR", "task '" + name + "' defined twice", kv.first);
    lib.definitions.emplace(name, parse_task(name, kv.second, warnings));
  }
  return lib;
}

TaskLibrary parse_recipe_file(const std::string& path, std::vector<Diagnostic>* warnings) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open recipe file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_recipe(buf.str(), warnings);
}

void merge_libraries(TaskLibrary& base, const TaskLibrary& extra) {
  for (const auto& [name, def] : extra.definitions) {
    if (base.definitions.count(name))
      throw LoadError("DUPLICATE_TASK", "task '" + name + "' defined in more than one file");
    base.definitions.emplace(name, def);
  }
  base.validated = false;
}

// ---- condition grammar ----

namespace {

struct Token {
  enum Kind { Ref, Literal, Word, Op, LParen, RParen, End } kind = End;
  std::string text;   // Word/Op: spelling; Ref: full dotted form
  Value literal;      // Literal
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
    std::size_t start = i_;
    if (i_ >= text_.size()) return {Token::End, "", {}, start};

    char c = text_[i_];
    if (c == '(') { ++i_; return {Token::LParen, "(", {}, start}; }
    if (c == ')') { ++i_; return {Token::RParen, ")", {}, start}; }

    if (c == '\'' || c == '"') {
      ++i_;
      std::string s;
      while (i_ < text_.size() && text_[i_] != c) s += text_[i_++];
      if (i_ >= text_.size())
        throw LoadError("SYNTAX_ERROR", "unterminated string literal in condition", 0,
                        static_cast<int>(start));
      ++i_;
      return {Token::Literal, s, Value(s), start};
    }

    if (c == '=' || c == '!' || c == '<' || c == '>') {
      std::string op(1, c);
      ++i_;
      if (i_ < text_.size() && text_[i_] == '=') { op += '='; ++i_; }
      if (op == "=" || op == "!")
        throw LoadError("SYNTAX_ERROR", "unknown operator '" + op + "' in condition", 0,
                        static_cast<int>(start));
      return {Token::Op, op, {}, start};
    }

    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' ||
        c == '.') {
      std::string word;
      while (i_ < text_.size()) {
        char w = text_[i_];
        if (std::isalnum(static_cast<unsigned char>(w)) || w == '_' || w == '.' || w == '-' ||
            w == '+') {
          word += w;
          ++i_;
        } else {
          break;
        }
      }
      if (word.rfind("params.", 0) == 0 || word.rfind("var.", 0) == 0 ||
          word.rfind("db.", 0) == 0)
        return {Token::Ref, word, {}, start};
      if (word == "true") return {Token::Literal, word, Value(true), start};
      if (word == "false") return {Token::Literal, word, Value(false), start};
      if (word == "null") return {Token::Literal, word, Value(nullptr), start};
      if (word == "and" || word == "or" || word == "not" || word == "exists")
        return {Token::Word, word, {}, start};
      Value v = yaml_scalar_to_value(word, false);
      if (v.is_number()) return {Token::Literal, word, v, start};
      throw LoadError("SYNTAX_ERROR",
                      "bare word '" + word + "' in condition; quote string literals", 0,
                      static_cast<int>(start));
    }
    throw LoadError("SYNTAX_ERROR", std::string("unexpected character '") + c + "' in condition",
                    0, static_cast<int>(start));
  }

 private:
  const std::string& text_;
  std::size_t i_ = 0;
};

class ConditionParser {
 public:
  explicit ConditionParser(const std::string& text) : lexer_(text) { advance(); }

  Expression parse() {
    Expression e = or_expr();
    if (cur_.kind != Token::End)
      throw LoadError("SYNTAX_ERROR", "trailing input in condition at '" + cur_.text + "'", 0,
                      static_cast<int>(cur_.pos));
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  bool accept_word(const char* w) {
    if (cur_.kind == Token::Word && cur_.text == w) {
      advance();
      return true;
    }
    return false;
  }

  Expression or_expr() {
    std::vector<Expression> operands;
    operands.push_back(and_expr());
    while (accept_word("or")) operands.push_back(and_expr());
    if (operands.size() == 1) return operands[0];
    return Expression::make_bool(BoolOpKind::Or, std::move(operands));
  }

  Expression and_expr() {
    std::vector<Expression> operands;
    operands.push_back(not_expr());
    while (accept_word("and")) operands.push_back(not_expr());
    if (operands.size() == 1) return operands[0];
    return Expression::make_bool(BoolOpKind::And, std::move(operands));
  }

  Expression not_expr() {
    if (accept_word("not"))
      return Expression::make_bool(BoolOpKind::Not, {not_expr()});
    return comparison();
  }

  Expression comparison() {
    Expression lhs = primary();
    if (cur_.kind == Token::Op) {
      std::string op = cur_.text;
      advance();
      Expression rhs = primary();
      CompareOp cmp;
      if (op == "==") cmp = CompareOp::Eq;
      else if (op == "!=") cmp = CompareOp::Ne;
      else if (op == "<") cmp = CompareOp::Lt;
      else if (op == "<=") cmp = CompareOp::Le;
      else if (op == ">") cmp = CompareOp::Gt;
      else cmp = CompareOp::Ge;
      return Expression::make_compare(cmp, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expression primary() {
    if (cur_.kind == Token::LParen) {
      advance();
      Expression e = or_expr();
      expect_rparen();
      return e;
    }
    if (cur_.kind == Token::Word && cur_.text == "exists") {
      advance();
      if (cur_.kind != Token::LParen)
        throw LoadError("SYNTAX_ERROR", "exists needs a parenthesized reference", 0,
                        static_cast<int>(cur_.pos));
      advance();
      Expression ref = primary();
      if (ref.kind != ExprKind::ParamRef && ref.kind != ExprKind::VarRef &&
          ref.kind != ExprKind::DbRef)
        throw LoadError("SYNTAX_ERROR", "exists takes a params./var./db. reference", 0,
                        static_cast<int>(cur_.pos));
      expect_rparen();
      return Expression::make_exists(std::move(ref));
    }
    if (cur_.kind == Token::Ref) {
      std::string word = cur_.text;
      advance();
      if (word.rfind("params.", 0) == 0) return Expression::make_param_ref(word.substr(7));
      if (word.rfind("var.", 0) == 0) return Expression::make_var_ref(word.substr(4));
      return Expression::make_db_ref(word.substr(3));
    }
    if (cur_.kind == Token::Literal) {
      Value v = cur_.literal;
      advance();
      return Expression::make_literal(std::move(v));
    }
    throw LoadError("SYNTAX_ERROR", "expected a value in condition, got '" + cur_.text + "'", 0,
                    static_cast<int>(cur_.pos));
  }

  void expect_rparen() {
    if (cur_.kind != Token::RParen)
      throw LoadError("SYNTAX_ERROR", "missing ')' in condition", 0, static_cast<int>(cur_.pos));
    advance();
  }

  Lexer lexer_;
  Token cur_;
};

}  // namespace

Expression parse_condition(const std::string& text) { return ConditionParser(text).parse(); }

}  // namespace rtask::dsl
