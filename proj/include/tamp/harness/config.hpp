#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tamp/envs/irrelevant.hpp"
#include "tamp/nn/mlp.hpp"
#include "tamp/planner/planner.hpp"
#include "tamp/skills/skills.hpp"

namespace tamp::harness {

class ConfigError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Everything an experiment needs. Defaults are the published
/// hyperparameters; a JSON config file may set any field and command-line
/// flags override both.
struct ExperimentConfig {
  std::string env = "cover";
  std::size_t n_demos = 1000;
  std::vector<std::uint64_t> seeds = {0};

  // Planning. n_abstract is per environment unless set: 8 for Cover, 1000
  // for Stick Button.
  std::optional<int> n_abstract;
  int n_samples = 10;
  std::size_t max_nodes = 1'000'000;
  double timeout_s = 300.0;
  int horizon = 1000;
  std::size_t n_eval_tasks = 50;

  nn::TrainConfig policy;
  nn::TrainConfig generator = [] {
    nn::TrainConfig c;
    c.epochs = 50000;
    return c;
  }();
  nn::TrainConfig classifier;
  int rejection_tries = 100;

  bool no_subgoal = false;
  bool pass_through = false;
  bool filter_enabled = true;
  double filter_fraction = 0.01;

  // Objects are added to evaluation tasks only; predicates apply to
  // training and evaluation.
  envs::IrrelevantSpec irrelevant;

  int workers = 0;  // 0: one per hardware thread

  skills::Mode mode() const;
  planner::PlannerConfig planner_config() const;
  skills::SkillTrainConfig skill_config(std::uint64_t seed) const;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Fields missing from `j` keep their values in `base`; unknown keys and
/// wrong types throw ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);

nlohmann::json to_json(const nn::TrainConfig& c);

}  // namespace tamp::harness
