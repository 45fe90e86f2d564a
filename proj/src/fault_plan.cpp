#include "rtask/sim/fault_plan.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rtask/errors.hpp"
#include "rtask/value.hpp"

namespace rtask::sim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_hash(std::uint64_t seed, const std::string& tag, std::uint64_t ordinal) {
  std::uint64_t h = splitmix64(seed);
  for (unsigned char c : tag) h = splitmix64(h ^ c);
  return splitmix64(h ^ ordinal);
}

double hash_unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double FaultInjectionPlan::probability_for(const std::string& action) const {
  auto it = per_action_probability.find(action);
  return it == per_action_probability.end() ? default_probability : it->second;
}

std::optional<std::string> FaultInjectionPlan::next_fault(
    const std::string& action, std::uint64_t ordinal, std::uint64_t run_seed,
    const std::vector<std::string>& vocab) const {
  for (const auto& entry : deterministic)
    if (entry.action == action && entry.ordinal == ordinal) return entry.signal;

  double p = probability_for(action);
  if (p <= 0.0) return std::nullopt;
  std::uint64_t h = mix_hash(seed ^ run_seed, action, ordinal);
  if (hash_unit_interval(h) >= p) return std::nullopt;

  auto pool_it = signal_pools.find(action);
  const std::vector<std::string>& pool =
      pool_it != signal_pools.end() ? pool_it->second : vocab;
  if (pool.empty()) return std::nullopt;
  std::uint64_t pick = mix_hash(seed ^ run_seed, action + "#signal", ordinal);
  return pool[pick % pool.size()];
}

namespace {

[[noreturn]] void fail(const char* code, const YAML::Node& node, const std::string& message) {
  throw LoadError(code, message, node.Mark().line, node.Mark().column);
}

double probability(const YAML::Node& node) {
  Value v = yaml_to_value(node);
  if (!v.is_number()) fail("STRUCTURE_ERROR", node, "probability must be numeric");
  double p = v.get<double>();
  if (p < 0.0 || p > 1.0)
    fail("RANGE_ERROR", node, "probability " + std::to_string(p) + " outside [0,1]");
  return p;
}

}  // namespace

FaultInjectionPlan load_fault_plan(const std::string& text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw LoadError("SYNTAX_ERROR", e.msg, e.mark.line, e.mark.column);
  }
  FaultInjectionPlan plan;
  if (doc.IsNull() || !doc.IsDefined()) return plan;
  if (!doc.IsMap()) throw LoadError("STRUCTURE_ERROR", "fault plan must be a map");

  for (const auto& section : doc) {
    std::string key = section.first.as<std::string>();
    const YAML::Node& node = section.second;
    if (key == "deterministic") {
      if (!node.IsSequence())
        fail("STRUCTURE_ERROR", node, "deterministic entries must be a list");
      for (const auto& item : node) {
        if (!item.IsMap() || !item["action"] || !item["ordinal"] || !item["signal"])
          fail("STRUCTURE_ERROR", item, "each entry needs action/ordinal/signal");
        DeterministicFault entry;
        entry.action = item["action"].as<std::string>();
        Value ord = yaml_to_value(item["ordinal"]);
        if (!ord.is_number_integer() || ord.get<long long>() < 1)
          fail("STRUCTURE_ERROR", item["ordinal"], "ordinal must be a positive integer");
        entry.ordinal = ord.get<std::uint64_t>();
        entry.signal = item["signal"].as<std::string>();
        plan.deterministic.push_back(std::move(entry));
      }
    } else if (key == "default_probability") {
      plan.default_probability = probability(node);
    } else if (key == "per_action_probability") {
      if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "per-action probabilities must be a map");
      for (const auto& item : node)
        plan.per_action_probability[item.first.as<std::string>()] = probability(item.second);
    } else if (key == "signal_pools") {
      if (!node.IsMap()) fail("STRUCTURE_ERROR", node, "signal_pools must be a map");
      for (const auto& item : node) {
        if (!item.second.IsSequence())
          fail("STRUCTURE_ERROR", item.second, "a signal pool must be a list");
        std::vector<std::string> pool;
        for (const auto& signal : item.second) pool.push_back(signal.as<std::string>());
        plan.signal_pools[item.first.as<std::string>()] = std::move(pool);
      }
    } else if (key == "seed") {
      Value v = yaml_to_value(node);
      if (!v.is_number_integer())
        fail("STRUCTURE_ERROR", node, "plan seed must be an integer");
      plan.seed = v.get<std::uint64_t>();
    } else {
      fail("STRUCTURE_ERROR", node, "unknown fault plan section '" + key + "'");
    }
  }
  return plan;
}

FaultInjectionPlan load_fault_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("SYNTAX_ERROR", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_fault_plan(buf.str());
}

}  // namespace rtask::sim
