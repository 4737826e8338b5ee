#include "tamp/envs/environment.hpp"

#include <algorithm>
#include <cmath>

#include "tamp/core/error.hpp"
#include "tamp/envs/cover.hpp"
#include "tamp/envs/stick_button.hpp"
#include "tamp/util/rng.hpp"

namespace tamp::envs {

const ObjectType& Environment::type(std::string_view name) const {
  for (const auto& t : types()) {
    if (t.name() == name) return t;
  }
  throw ContractViolation(this->name() + " has no type '" + std::string(name) + "'");
}

const Predicate& Environment::predicate(std::string_view name) const {
  if (const Predicate* p = find_predicate(predicates(), name)) return *p;
  throw ContractViolation(this->name() + " has no predicate '" + std::string(name) + "'");
}

AbstractState Environment::abstract(const State& x) const {
  return tamp::abstract(x, predicates());
}

const Environment& get_environment(std::string_view name) {
  static const CoverEnv cover;
  static const StickButtonEnv stick_button;
  if (name == cover.name()) return cover;
  if (name == stick_button.name()) return stick_button;
  throw ContractViolation("unknown environment '" + std::string(name) + "'");
}

std::vector<State> replay(const Environment& env, const State& init,
                          std::span<const Action> actions) {
  std::vector<State> states{init};
  states.reserve(actions.size() + 1);
  for (const auto& u : actions) states.push_back(env.step(states.back(), u));
  return states;
}

std::string validate_demo(const Environment& env, const Demonstration& demo,
                          std::span<const Predicate> preds, double tolerance) {
  const Task& task = demo.task;
  if (demo.states.size() != demo.actions.size() + 1) {
    return "expected " + std::to_string(demo.actions.size() + 1) + " states, got " +
           std::to_string(demo.states.size());
  }
  if (static_cast<int>(demo.actions.size()) > task.horizon) {
    return "demonstration longer than the horizon";
  }
  if (!(demo.states.front() == task.init)) return "first state differs from task init";
  for (const auto& atom : task.goal) {
    for (Object o : atom.objects) {
      if (!task.init.has(o)) return "goal mentions unknown object " + o.name();
    }
  }
  State x = task.init;
  for (std::size_t i = 0; i < demo.actions.size(); ++i) {
    if (demo.actions[i].size() != env.action_dim()) {
      return "action " + std::to_string(i) + " has wrong dimension";
    }
    x = env.step(x, demo.actions[i]);
    if (max_abs_difference(x, demo.states[i + 1]) > tolerance) {
      return "replay diverges at step " + std::to_string(i + 1);
    }
  }
  if (!goal_holds(task.goal, tamp::abstract(x, preds))) {
    return "goal does not hold in the final state";
  }
  return "";
}

bool solves(const Environment& env, const Task& task,
            std::span<const Action> actions, std::span<const Predicate> preds) {
  if (static_cast<int>(actions.size()) > task.horizon) return false;
  State x = task.init;
  for (const auto& u : actions) {
    if (u.size() != env.action_dim()) return false;
    x = env.step(x, u);
  }
  return goal_holds(task.goal, tamp::abstract(x, preds));
}

std::vector<Demonstration> generate_demos(const Environment& env, std::size_t n,
                                          std::uint64_t seed, std::size_t* skipped) {
  std::vector<Demonstration> out;
  std::size_t misses = 0;
  for (std::uint64_t i = 0; out.size() < n; ++i) {
    Task task = env.sample_task(derive_seed({seed, i}), Profile::kTrain);
    auto demo = env.scripted_demo(task);
    if (!demo) {
      if (++misses > 10 * n + 100) throw Error("scripted demonstrator keeps failing");
      continue;
    }
    out.push_back(std::move(*demo));
  }
  if (skipped) *skipped = misses;
  return out;
}

}  // namespace tamp::envs
