#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "tamp/envs/environment.hpp"
#include "tamp/operators/operators.hpp"
#include "tamp/skills/skills.hpp"

namespace tamp::planner {

struct PlannerConfig {
  int n_abstract = 8;
  int n_samples = 10;
  std::size_t max_nodes = 1'000'000;
  double timeout_s = 300.0;
};

/// Additive delete-relaxation cost of reaching `goal` from `s`; infinity if
/// the relaxation cannot reach it. Every operator costs 1.
double heuristic(const AbstractState& s, const GroundAtomSet& goal,
                 std::span<const operators::GroundOperator> ops);

struct AbstractPlan {
  std::vector<operators::GroundOperator> steps;
  std::vector<AbstractState> states;  // steps.size() + 1
};

using Clock = std::chrono::steady_clock;

/// Lazily enumerates distinct abstract plans in nondecreasing length.
///
/// Plans are simple paths (no abstract state repeats along a plan) whose only
/// goal-satisfying state is the last one. The frontier is ordered by plan
/// length, then heuristic, then insertion order, with successors generated
/// in canonical ground-operator order; nodes whose heuristic is infinite are
/// pruned.
class TopKStream {
 public:
  TopKStream(const AbstractState& s0, const GroundAtomSet& goal,
             std::vector<operators::GroundOperator> ops, std::size_t max_nodes,
             std::optional<Clock::time_point> deadline = std::nullopt);
  ~TopKStream();
  TopKStream(TopKStream&&) noexcept;

  std::optional<AbstractPlan> next();
  std::size_t nodes_created() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Every grounding of every operator over `objects`, in canonical order
/// (operator index, then object names).
std::vector<operators::GroundOperator> ground_all(
    std::span<const operators::Operator* const> ops, std::span<const Object> objects);

/// What refinement needs from skills. The learned implementation wraps
/// skills::Skill; tests substitute stubs.
class SkillRuntime {
 public:
  virtual ~SkillRuntime() = default;
  virtual std::size_t size() const = 0;
  virtual const operators::Operator& op(std::size_t i) const = 0;
  /// False when repeated attempts would all behave identically.
  virtual bool stochastic(std::size_t i) const = 0;
  virtual nn::Vector sample(std::size_t i, std::span<const Object> objects, const State& x,
                            Rng& rng) const = 0;
  virtual skills::Rollout execute(std::size_t i, std::span<const Object> objects,
                                  const State& x, const nn::Vector& param,
                                  const AbstractState& expected) const = 0;
};

class LearnedRuntime final : public SkillRuntime {
 public:
  LearnedRuntime(const std::vector<skills::Skill>& skills, const envs::Environment& env,
                 std::vector<Predicate> preds);
  std::size_t size() const override { return skills_.size(); }
  const operators::Operator& op(std::size_t i) const override { return skills_[i].op; }
  bool stochastic(std::size_t i) const override { return skills_[i].has_sampler(); }
  nn::Vector sample(std::size_t i, std::span<const Object> objects, const State& x,
                    Rng& rng) const override;
  skills::Rollout execute(std::size_t i, std::span<const Object> objects, const State& x,
                          const nn::Vector& param,
                          const AbstractState& expected) const override;

 private:
  const std::vector<skills::Skill>& skills_;
  const envs::Environment& env_;
  std::vector<Predicate> preds_;
};

struct Metrics {
  bool solved = false;
  double wall_time_s = 0.0;
  std::size_t nodes_created = 0;
  std::size_t plans_tried = 0;
  std::size_t samples_drawn = 0;
  std::size_t solution_length = 0;
  bool timed_out = false;
};

/// Backtracking refinement of one abstract plan. Step i draws at most
/// n_samples parameters per visit (one for deterministic skills); on
/// exhaustion it backtracks to step i-1. The rng for each draw is derived
/// from (seed, plan_index, step, draw count at that step).
std::optional<std::vector<Action>> refine(const AbstractPlan& plan, const Task& task,
                                          const SkillRuntime& skills,
                                          const PlannerConfig& config, std::uint64_t seed,
                                          std::size_t plan_index, Clock::time_point deadline,
                                          Metrics& metrics);

struct PlanResult {
  std::optional<std::vector<Action>> actions;
  Metrics metrics;
};

/// Bilevel planning: refine streamed abstract plans until one replays to the
/// goal within the horizon, n_abstract plans were tried, or time runs out.
PlanResult plan(const Task& task, const SkillRuntime& skills, const envs::Environment& env,
                std::span<const Predicate> preds, const PlannerConfig& config,
                std::uint64_t seed);

}  // namespace tamp::planner
