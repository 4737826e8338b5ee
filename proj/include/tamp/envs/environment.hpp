#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tamp/core/task.hpp"

namespace tamp::envs {

enum class Profile { kTrain, kEval };

/// Deterministic simulator plus task distribution, predicates, and a scripted
/// demonstrator. Implementations are stateless and safe to share.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const std::string& name() const = 0;
  virtual const std::vector<ObjectType>& types() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual const std::vector<Predicate>& predicates() const = 0;

  /// Transition function. Out-of-range action components are clipped.
  virtual State step(const State& x, std::span<const double> action) const = 0;

  virtual Task sample_task(std::uint64_t seed, Profile profile) const = 0;

  /// Returns nullopt when the scripted policy fails to reach the goal within
  /// the horizon.
  virtual std::optional<Demonstration> scripted_demo(const Task& task) const = 0;

  const ObjectType& type(std::string_view name) const;
  const Predicate& predicate(std::string_view name) const;
  AbstractState abstract(const State& x) const;
};

/// "cover" or "stick_button"; throws on an unknown name.
const Environment& get_environment(std::string_view name);

/// Replays `actions` from `init`; used by loaders and solution checks.
std::vector<State> replay(const Environment& env, const State& init,
                          std::span<const Action> actions);

/// Checks the replay invariant (per-feature tolerance) and goal achievement.
/// Returns an empty string when valid, otherwise a reason.
std::string validate_demo(const Environment& env, const Demonstration& demo,
                          std::span<const Predicate> preds,
                          double tolerance = 1e-9);

/// True iff the actions replay from the task's initial state to a state where
/// the goal holds, within the horizon.
bool solves(const Environment& env, const Task& task,
            std::span<const Action> actions, std::span<const Predicate> preds);

/// Samples train-profile tasks from consecutive derived seeds and keeps the
/// first `n` the scripted demonstrator solves. Failures are counted in
/// `skipped` when given.
std::vector<Demonstration> generate_demos(const Environment& env, std::size_t n,
                                          std::uint64_t seed,
                                          std::size_t* skipped = nullptr);

}  // namespace tamp::envs
