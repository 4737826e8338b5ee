#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tamp/harness/config.hpp"

namespace tamp::harness {

/// Writes exactly `config.n_demos` train-profile demonstrations. Returns the
/// number of sampled tasks the demonstrator failed on.
std::size_t generate_demos_file(const ExperimentConfig& config, std::uint64_t seed,
                                const std::string& path);

/// Learned skills plus the manifest describing how they were made.
struct Bundle {
  nlohmann::json manifest;
  std::vector<skills::Skill> skills;
  std::vector<Predicate> predicates;  // environment + injected

  const std::string& env_name() const;
};

struct TrainReport {
  std::size_t n_segments = 0;
  std::vector<std::size_t> dataset_sizes;  // before filtering
  std::vector<std::string> operator_texts;
  double seconds = 0.0;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

/// Predicates used for abstraction under `config`.
std::vector<Predicate> predicates_for(const ExperimentConfig& config);

/// preprocess, filter, operators, policies, samplers. Throws TrainingFailure
/// when no skill dataset survives filtering.
Bundle train(const ExperimentConfig& config, std::span<const Demonstration> demos,
             std::uint64_t seed, TrainReport* report = nullptr);

/// Bundles are one JSON document with "manifest", "operators" and "skills"
/// sections. Serialization is canonical: save(load(b)) is byte-identical.
std::string bundle_to_string(const Bundle& b);
Bundle bundle_from_string(const std::string& text);
void save_bundle(const Bundle& b, const std::string& path);
Bundle load_bundle(const std::string& path);

nlohmann::json report_to_json(const TrainReport& r);

struct TaskRow {
  std::uint64_t seed = 0;
  std::size_t task = 0;
  planner::Metrics metrics;
  std::optional<std::vector<Action>> actions;  // kept on request
};

struct SeedSummary {
  std::uint64_t seed = 0;
  double success = 0.0;  // percent
  double eval_seconds = 0.0;
};

struct MetricsReport {
  std::vector<TaskRow> rows;
  std::vector<SeedSummary> seeds;
  double learning_seconds = 0.0;
  double mean() const;
  double stddev() const;  // population, over seeds
};

/// Evaluation task i of `seed` (before irrelevant-object injection).
Task eval_task(const ExperimentConfig& config, std::uint64_t seed, std::size_t i);

/// Plans on `n_eval_tasks` evaluation tasks per seed. A task counts as solved
/// only when its actions replay to the goal. Refuses bundles trained for a
/// different environment.
MetricsReport evaluate(const ExperimentConfig& config, const Bundle& bundle,
                       std::span<const std::uint64_t> seeds, bool keep_actions = false);

/// eval_task plus the configured irrelevant objects: exactly what evaluate()
/// plans on.
Task planned_task(const ExperimentConfig& config, std::uint64_t seed, std::size_t i);

void merge(MetricsReport& into, const MetricsReport& more);
void write_csv(std::ostream& out, const MetricsReport& r);
std::string summary(const MetricsReport& r);

/// Human-readable description of a bundle.
std::string inspect(const Bundle& b);

/// Verbosity from TAMP_LOG (0 quiet, 1 progress, 2 debug); default 1.
int log_level();
void log(int level, const std::string& message);

}  // namespace tamp::harness
