// Fault injection: scripted per-invocation entries plus seeded stochastic
// draws that are a pure function of invocation history.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rtask::sim {

struct DeterministicFault {
  std::string action;
  std::uint64_t ordinal = 1;  // 1-based invocation index
  std::string signal;
};

struct FaultInjectionPlan {
  std::vector<DeterministicFault> deterministic;
  double default_probability = 0.0;
  std::map<std::string, double> per_action_probability;
  // Optional per-action signal pools for stochastic draws; an absent entry
  // means the action's full signal vocabulary.
  std::map<std::string, std::vector<std::string>> signal_pools;
  std::uint64_t seed = 0;

  double probability_for(const std::string& action) const;

  // Deterministic entries win; otherwise a hash of (seed ^ run_seed, action,
  // ordinal) drives a Bernoulli draw and a uniform pick from `vocab` (or the
  // configured pool). No RNG stream: the draw depends only on the arguments.
  std::optional<std::string> next_fault(const std::string& action, std::uint64_t ordinal,
                                        std::uint64_t run_seed,
                                        const std::vector<std::string>& vocab) const;
};

// Stable hash used for all seeded draws in the harness.
std::uint64_t mix_hash(std::uint64_t seed, const std::string& tag, std::uint64_t ordinal);
// Uniform double in [0,1) from a hash value.
double hash_unit_interval(std::uint64_t h);

// Throws LoadError SYNTAX_ERROR, STRUCTURE_ERROR, RANGE_ERROR.
FaultInjectionPlan load_fault_plan(const std::string& text);
FaultInjectionPlan load_fault_plan_file(const std::string& path);

}  // namespace rtask::sim
