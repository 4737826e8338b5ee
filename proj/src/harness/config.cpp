#include "tamp/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tamp::harness {

using nlohmann::json;

skills::Mode ExperimentConfig::mode() const {
  if (no_subgoal && pass_through) {
    throw ConfigError("no_subgoal and pass_through are mutually exclusive");
  }
  if (pass_through) return skills::Mode::kPassThrough;
  return no_subgoal ? skills::Mode::kNoSubgoal : skills::Mode::kSubgoal;
}

planner::PlannerConfig ExperimentConfig::planner_config() const {
  planner::PlannerConfig p;
  p.n_abstract = n_abstract.value_or(env == "stick_button" ? 1000 : 8);
  p.n_samples = n_samples;
  p.max_nodes = max_nodes;
  p.timeout_s = timeout_s;
  return p;
}

skills::SkillTrainConfig ExperimentConfig::skill_config(std::uint64_t seed) const {
  skills::SkillTrainConfig c;
  c.mode = mode();
  c.policy = policy;
  c.generator = generator;
  c.classifier = classifier;
  c.rejection_tries = rejection_tries;
  c.seed = seed;
  return c;
}

json to_json(const nn::TrainConfig& c) {
  return {{"epochs", c.epochs},         {"lr", c.lr},
          {"beta1", c.beta1},           {"beta2", c.beta2},
          {"eps", c.eps},               {"hidden", c.hidden},
          {"normalize_targets", c.normalize_targets},
          {"record_every", c.record_every}};
}

json to_json(const ExperimentConfig& c) {
  return {{"env", c.env},
          {"n_demos", c.n_demos},
          {"seeds", c.seeds},
          {"n_abstract", c.n_abstract ? json(*c.n_abstract) : json(nullptr)},
          {"n_samples", c.n_samples},
          {"max_nodes", c.max_nodes},
          {"timeout_s", c.timeout_s},
          {"horizon", c.horizon},
          {"n_eval_tasks", c.n_eval_tasks},
          {"policy", to_json(c.policy)},
          {"generator", to_json(c.generator)},
          {"classifier", to_json(c.classifier)},
          {"rejection_tries", c.rejection_tries},
          {"no_subgoal", c.no_subgoal},
          {"pass_through", c.pass_through},
          {"filter_enabled", c.filter_enabled},
          {"filter_fraction", c.filter_fraction},
          {"irrelevant",
           {{"objects", c.irrelevant.n_objects},
            {"static_predicates", c.irrelevant.n_static_preds},
            {"dynamic_predicates", c.irrelevant.n_dynamic_preds},
            {"random_predicates", c.irrelevant.n_random_preds},
            {"seed", c.irrelevant.seed}}},
          {"workers", c.workers}};
}

namespace {

// Reads the keys of one JSON object, rejecting anything it does not know.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("config section '" + where() + "' must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError("unknown config key '" + join(k) + "'");
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + join(key) + "': " + e.what());
    }
  }
  void get(const std::string& key, std::optional<int>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    int v = 0;
    get(key, v);
    out = v;
  }
  void get(const std::string& key, nn::TrainConfig& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), join(key));
    r.get("epochs", out.epochs);
    r.get("lr", out.lr);
    r.get("beta1", out.beta1);
    r.get("beta2", out.beta2);
    r.get("eps", out.eps);
    r.get("hidden", out.hidden);
    r.get("normalize_targets", out.normalize_targets);
    r.get("record_every", out.record_every);
  }
  void get(const std::string& key, envs::IrrelevantSpec& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), join(key));
    r.get("objects", out.n_objects);
    r.get("static_predicates", out.n_static_preds);
    r.get("dynamic_predicates", out.n_dynamic_preds);
    r.get("random_predicates", out.n_random_preds);
    r.get("seed", out.seed);
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  std::string join(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  {
    Reader r(j, "");
    r.get("env", c.env);
    r.get("n_demos", c.n_demos);
    r.get("seeds", c.seeds);
    r.get("n_abstract", c.n_abstract);
    r.get("n_samples", c.n_samples);
    r.get("max_nodes", c.max_nodes);
    r.get("timeout_s", c.timeout_s);
    r.get("horizon", c.horizon);
    r.get("n_eval_tasks", c.n_eval_tasks);
    r.get("policy", c.policy);
    r.get("generator", c.generator);
    r.get("classifier", c.classifier);
    r.get("rejection_tries", c.rejection_tries);
    r.get("no_subgoal", c.no_subgoal);
    r.get("pass_through", c.pass_through);
    r.get("filter_enabled", c.filter_enabled);
    r.get("filter_fraction", c.filter_fraction);
    r.get("irrelevant", c.irrelevant);
    r.get("workers", c.workers);
  }
  c.mode();  // validates the flag combination
  if (c.env != "cover" && c.env != "stick_button") {
    throw ConfigError("config key 'env': unknown environment '" + c.env + "'");
  }
  if (c.n_samples < 1) throw ConfigError("config key 'n_samples' must be positive");
  if (c.n_abstract && *c.n_abstract < 1) {
    throw ConfigError("config key 'n_abstract' must be positive");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace tamp::harness
