#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tamp/envs/environment.hpp"
#include "tamp/nn/mlp.hpp"
#include "tamp/operators/operators.hpp"
#include "tamp/preprocess/preprocess.hpp"

namespace tamp::skills {

enum class Mode { kSubgoal, kNoSubgoal, kPassThrough };

std::string to_string(Mode m);
Mode parse_mode(std::string_view s);

/// x(o1) ∘ ... ∘ x(on), in argument order.
nn::Vector scoped_vector(const State& x, std::span<const Object> objects);
/// Inverse of scoped_vector: overwrites the scoped objects' features.
void write_scoped(State& x, std::span<const Object> objects, const nn::Vector& v);
std::size_t scoped_dim(std::span<const Variable> vars);

struct SkillTrainConfig {
  Mode mode = Mode::kSubgoal;
  nn::TrainConfig policy;
  nn::TrainConfig generator = [] {
    nn::TrainConfig c;
    c.epochs = 50000;
    return c;
  }();
  nn::TrainConfig classifier;
  int rejection_tries = 100;
  double static_tolerance = 1e-6;
  double negative_noise = 5.0;  // in per-dimension standard deviations
  int min_horizon = 10;
  double horizon_factor = 1.5;
  std::uint64_t seed = 0;
};

/// Operator plus learned policy and sampler over one argument tuple.
///
/// The sampler parameter is a plain vector: the absolute scoped subgoal in
/// subgoal mode, the raw action in pass-through mode, and empty in
/// no-subgoal mode. A subgoal-mode skill whose relative subgoal is fully
/// static has no sampler networks and a deterministic parameter.
struct Skill {
  operators::Operator op;
  Mode mode = Mode::kSubgoal;
  int horizon = 10;
  std::vector<std::size_t> static_dims;  // into the scoped vector
  std::vector<double> static_values;     // constant relative value per static dim
  std::size_t dataset_size = 0;
  std::size_t max_segment_length = 0;
  std::optional<nn::Network> policy;
  std::optional<nn::Network> generator;
  std::optional<nn::Network> classifier;
  int rejection_tries = 100;

  const std::vector<Variable>& arguments() const { return op.arguments; }
  bool has_sampler() const { return generator.has_value(); }
  std::size_t dim() const { return scoped_dim(op.arguments); }
  /// Relative subgoal with static dimensions removed.
  nn::Vector dynamic_part(const nn::Vector& relative) const;
  /// Action for the scoped state `xs` given the sampler parameter.
  Action act(const nn::Vector& xs, const nn::Vector& param) const;
};

/// Supervised pairs. Rows are samples.
struct Pairs {
  nn::Matrix inputs;
  nn::Matrix targets;
};

/// Objects bound to each variable for segment `i`, in argument order.
std::vector<Object> segment_objects(const preprocess::LiftedSkillDataset& lds,
                                    std::size_t i);

/// Dimensions of the relative subgoal that never vary over the demonstrated
/// steps (max - min < tolerance), with their constant values.
std::pair<std::vector<std::size_t>, std::vector<double>> static_dimensions(
    const preprocess::LiftedSkillDataset& lds, double tolerance = 1e-6);

/// One pair per demonstrated step: scoped state ∘ dynamic relative subgoal
/// (omitted in no-subgoal mode) -> action.
Pairs build_policy_dataset(const preprocess::LiftedSkillDataset& lds,
                           std::span<const std::size_t> static_dims, Mode mode);

/// One pair per segment: scoped initial state -> sampler parameter (dynamic
/// relative subgoal, or the first action in pass-through mode).
Pairs build_sampler_dataset(const preprocess::LiftedSkillDataset& lds,
                            std::span<const std::size_t> static_dims, Mode mode);

int skill_horizon(const preprocess::LiftedSkillDataset& lds, const SkillTrainConfig& cfg);

/// Trains one skill per dataset. `ops[i]` must come from `datasets[i]`.
/// Classifier negatives come from the other datasets with the same argument
/// type sequence; without one, from noisy copies of the positives.
std::vector<Skill> learn_skills(const std::vector<preprocess::LiftedSkillDataset>& datasets,
                                const std::vector<operators::Operator>& ops,
                                const SkillTrainConfig& cfg);

/// Draws from the generator until the classifier scores above 0.5, at most
/// `rejection_tries` times; the last draw is returned otherwise. Returns the
/// parameter (empty in no-subgoal mode). `draws`, if given, counts attempts.
nn::Vector sample_parameter(const Skill& skill, std::span<const Object> objects,
                            const State& x, Rng& rng, int* draws = nullptr);

/// The absolute subgoal state a subgoal-mode parameter encodes.
State subgoal_state(const State& x, std::span<const Object> objects,
                    const nn::Vector& param);

enum class Outcome { kSuccess, kTimeout, kWrongTransition };
std::string to_string(Outcome o);

struct Rollout {
  std::vector<Action> actions;
  std::vector<State> states;  // actions.size() + 1
  Outcome outcome = Outcome::kTimeout;
};

/// Steps the policy from x0 until the abstract state equals `expected`
/// (success), `horizon` steps pass (timeout), or a contact atom changes and
/// the result is not `expected` (wrong transition). Changes to non-contact
/// atoms alone do not end the rollout.
Rollout execute_policy(const Skill& skill, std::span<const Object> objects,
                       const State& x0, const nn::Vector& param,
                       const envs::Environment& env, std::span<const Predicate> preds,
                       const AbstractState& expected);

nlohmann::json to_json(const Skill& s);
Skill skill_from_json(const nlohmann::json& j, std::span<const Predicate> preds,
                      std::span<const ObjectType> types);

}  // namespace tamp::skills
