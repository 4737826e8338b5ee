#pragma once

#include <utility>
#include <vector>

#include "tamp/envs/environment.hpp"

namespace tamp::envs {

/// Counts for the Cover robustness experiments.
struct IrrelevantSpec {
  int n_objects = 0;
  int n_static_preds = 0;   // always true, over blocks
  int n_dynamic_preds = 0;  // threshold the gripper height
  int n_random_preds = 0;   // hash-seeded coin flip on every evaluation
  std::uint64_t seed = 0;

  bool empty() const {
    return n_objects == 0 && n_static_preds == 0 && n_dynamic_preds == 0 &&
           n_random_preds == 0;
  }
};

/// Adds `n` extra blocks parked off the table. They never appear in goals.
Task inject_irrelevant_objects(const Environment& env, const Task& task, int n,
                               std::uint64_t seed);

/// Extra predicates. Repeated calls with equal arguments return the same
/// predicate handles, so atoms built in different places compare equal.
std::vector<Predicate> irrelevant_predicates(const Environment& env,
                                             const IrrelevantSpec& spec);

/// Both of the above. Only Cover supports injection.
std::pair<Task, std::vector<Predicate>> inject_irrelevant(
    const Environment& env, const Task& task, const IrrelevantSpec& spec);

}  // namespace tamp::envs
