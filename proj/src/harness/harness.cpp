#include "tamp/harness/harness.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>

#include "tamp/envs/demo_io.hpp"
#include "tamp/operators/operators.hpp"
#include "tamp/preprocess/preprocess.hpp"

namespace tamp::harness {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int kBundleVersion = 1;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

envs::IrrelevantSpec predicate_part(const envs::IrrelevantSpec& s) {
  envs::IrrelevantSpec p = s;
  p.n_objects = 0;
  return p;
}

std::vector<Predicate> predicates_with(const envs::Environment& env,
                                       const envs::IrrelevantSpec& spec) {
  std::vector<Predicate> preds = env.predicates();
  if (!predicate_part(spec).empty()) {
    auto extra = envs::irrelevant_predicates(env, predicate_part(spec));
    preds.insert(preds.end(), extra.begin(), extra.end());
  }
  return preds;
}

std::string fmt(double v, int precision = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::string shape(const std::optional<nn::Network>& net) {
  if (!net) return "none";
  std::string out;
  for (std::size_t i = 0; i < net->mlp.sizes.size(); ++i) {
    out += (i ? "-" : "") + std::to_string(net->mlp.sizes[i]);
  }
  switch (net->mlp.head) {
    case nn::Head::kLinear: return out + " linear";
    case nn::Head::kGaussian: return out + " gaussian";
    case nn::Head::kLogistic: return out + " logistic";
  }
  return out;
}

}  // namespace

int log_level() {
  static const int level = [] {
    const char* v = std::getenv("TAMP_LOG");
    return v ? std::atoi(v) : 1;
  }();
  return level;
}

void log(int level, const std::string& message) {
  static std::mutex mu;
  if (level > log_level()) return;
  std::lock_guard lock(mu);
  std::cerr << message << '\n';
}

std::size_t generate_demos_file(const ExperimentConfig& config, std::uint64_t seed,
                                const std::string& path) {
  const auto& env = envs::get_environment(config.env);
  std::size_t skipped = 0;
  auto demos = envs::generate_demos(env, config.n_demos, seed, &skipped);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write demos file '" + path + "'");
  envs::write_demo_header(out, env);
  for (const auto& d : demos) envs::write_demo(out, d);
  if (!out) throw FormatError("failed writing demos file '" + path + "'");
  return skipped;
}

const std::string& Bundle::env_name() const {
  return manifest.at("env").get_ref<const std::string&>();
}

std::vector<Predicate> predicates_for(const ExperimentConfig& config) {
  return predicates_with(envs::get_environment(config.env), config.irrelevant);
}

Bundle train(const ExperimentConfig& config, std::span<const Demonstration> demos,
             std::uint64_t seed, TrainReport* report) {
  auto t0 = Clock::now();
  const auto& env = envs::get_environment(config.env);
  if (config.workers > 0) omp_set_num_threads(config.workers);
  Bundle b;
  b.predicates = predicates_for(config);

  auto datasets = preprocess::preprocess(demos, b.predicates, config.pass_through);
  TrainReport r;
  for (const auto& d : datasets) {
    r.dataset_sizes.push_back(d.dataset.segments.size());
    r.n_segments += d.dataset.segments.size();
  }
  auto kept = operators::filter_low_data(std::move(datasets), config.filter_enabled,
                                         config.filter_fraction);
  if (kept.empty()) {
    throw TrainingFailure("no skill datasets left after filtering (" +
                          std::to_string(r.dataset_sizes.size()) + " before, " +
                          std::to_string(r.n_segments) + " segments)");
  }
  std::vector<operators::Operator> ops;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ops.push_back(operators::learn_operator(kept[i], env.name() + "-op" + std::to_string(i)));
    r.operator_texts.push_back(operators::render_operator(ops.back()));
  }
  log(1, "training " + std::to_string(kept.size()) + " skills from " +
             std::to_string(r.n_segments) + " segments");
  b.skills = skills::learn_skills(kept, ops, config.skill_config(seed));

  std::uint64_t digest = fnv1a("");
  for (const auto& d : demos) digest = fnv1a(envs::demo_to_json(d).dump(), digest);
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << digest;
  auto spec = predicate_part(config.irrelevant);
  b.manifest = {{"format", "tamp-bundle"},
                {"version", kBundleVersion},
                {"env", env.name()},
                {"seed", seed},
                {"mode", skills::to_string(config.mode())},
                {"filter_enabled", config.filter_enabled},
                {"filter_fraction", config.filter_fraction},
                {"n_demos", demos.size()},
                {"demos_fnv1a", hex.str()},
                {"n_segments", r.n_segments},
                {"dataset_sizes", r.dataset_sizes},
                {"irrelevant_predicates",
                 {{"static", spec.n_static_preds},
                  {"dynamic", spec.n_dynamic_preds},
                  {"random", spec.n_random_preds},
                  {"seed", spec.seed}}},
                {"config", to_json(config)}};
  r.seconds = seconds_since(t0);
  if (report) *report = r;
  return b;
}

std::string bundle_to_string(const Bundle& b) {
  json ops = json::array(), sk = json::array();
  for (const auto& s : b.skills) {
    ops.push_back(operators::render_operator(s.op));
    sk.push_back(skills::to_json(s));
  }
  json j = {{"manifest", b.manifest}, {"operators", ops}, {"skills", sk}};
  return j.dump(1) + "\n";
}

Bundle bundle_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bundle is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("bundle must be a JSON object");
  for (const char* section : {"manifest", "operators", "skills"}) {
    if (!j.contains(section)) {
      throw FormatError(std::string("bundle section '") + section + "' is missing");
    }
  }
  Bundle b;
  const envs::Environment* env = nullptr;
  try {
    b.manifest = j.at("manifest");
    if (b.manifest.at("format") != "tamp-bundle") throw FormatError("wrong format tag");
    if (b.manifest.at("version") != kBundleVersion) throw FormatError("unsupported version");
    env = &envs::get_environment(b.manifest.at("env").get<std::string>());
    const auto& ip = b.manifest.at("irrelevant_predicates");
    envs::IrrelevantSpec spec;
    spec.n_static_preds = ip.at("static").get<int>();
    spec.n_dynamic_preds = ip.at("dynamic").get<int>();
    spec.n_random_preds = ip.at("random").get<int>();
    spec.seed = ip.at("seed").get<std::uint64_t>();
    b.predicates = predicates_with(*env, spec);
  } catch (const std::exception& e) {
    throw FormatError(std::string("bundle section 'manifest': ") + e.what());
  }
  const json& ops = j.at("operators");
  const json& sk = j.at("skills");
  if (!ops.is_array()) throw FormatError("bundle section 'operators' must be an array");
  if (!sk.is_array()) throw FormatError("bundle section 'skills' must be an array");
  if (ops.size() != sk.size()) {
    throw FormatError("bundle sections 'operators' and 'skills' differ in length");
  }
  for (std::size_t i = 0; i < sk.size(); ++i) {
    std::string section = "skills[" + std::to_string(i) + "]";
    try {
      b.skills.push_back(skills::skill_from_json(sk[i], b.predicates, env->types()));
      auto op = operators::parse_operator(ops[i].get<std::string>(), b.predicates,
                                          env->types());
      if (!(op == b.skills.back().op)) {
        throw FormatError("operator differs from operators[" + std::to_string(i) + "]");
      }
    } catch (const std::exception& e) {
      throw FormatError("bundle section '" + section + "': " + e.what());
    }
  }
  return b;
}

void save_bundle(const Bundle& b, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << bundle_to_string(b);
  if (!out) throw FormatError("cannot write bundle '" + path + "'");
}

Bundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open bundle '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  return bundle_from_string(s.str());
}

json report_to_json(const TrainReport& r) {
  return {{"n_segments", r.n_segments},
          {"dataset_sizes", r.dataset_sizes},
          {"operators", r.operator_texts},
          {"seconds", r.seconds}};
}

double MetricsReport::mean() const {
  if (seeds.empty()) return 0.0;
  double s = 0.0;
  for (const auto& x : seeds) s += x.success;
  return s / static_cast<double>(seeds.size());
}

double MetricsReport::stddev() const {
  if (seeds.empty()) return 0.0;
  double m = mean(), s = 0.0;
  for (const auto& x : seeds) s += (x.success - m) * (x.success - m);
  return std::sqrt(s / static_cast<double>(seeds.size()));
}

Task eval_task(const ExperimentConfig& config, std::uint64_t seed, std::size_t i) {
  const auto& env = envs::get_environment(config.env);
  Task t = env.sample_task(derive_seed({seed, i, 0xE7A1}), envs::Profile::kEval);
  t.horizon = config.horizon;
  return t;
}

Task planned_task(const ExperimentConfig& config, std::uint64_t seed, std::size_t i) {
  Task t = eval_task(config, seed, i);
  if (config.irrelevant.n_objects > 0) {
    t = envs::inject_irrelevant_objects(envs::get_environment(config.env), t,
                                        config.irrelevant.n_objects,
                                        derive_seed({config.irrelevant.seed, seed, i}));
  }
  return t;
}

MetricsReport evaluate(const ExperimentConfig& config, const Bundle& bundle,
                       std::span<const std::uint64_t> seeds, bool keep_actions) {
  if (bundle.env_name() != config.env) {
    throw ConfigError("bundle was trained on '" + bundle.env_name() +
                      "' but the config names '" + config.env + "'");
  }
  const auto& env = envs::get_environment(config.env);
  const auto pc = config.planner_config();
  planner::LearnedRuntime runtime(bundle.skills, env, bundle.predicates);
  int threads = config.workers > 0 ? config.workers : omp_get_max_threads();

  MetricsReport report;
  for (std::uint64_t seed : seeds) {
    auto t0 = Clock::now();
    std::vector<TaskRow> rows(config.n_eval_tasks);
    std::exception_ptr error;
    std::mutex error_mu;
    std::size_t done = 0;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      try {
        Task t = planned_task(config, seed, i);
        auto res = planner::plan(t, runtime, env, bundle.predicates, pc,
                                 derive_seed({seed, i, 0x91A4}));
        // Counted only when the actions replay to the goal.
        res.metrics.solved =
            res.actions && envs::solves(env, t, *res.actions, bundle.predicates);
        rows[i] = {seed, i, res.metrics, std::nullopt};
        if (keep_actions) rows[i].actions = std::move(res.actions);
        std::lock_guard lock(error_mu);
        ++done;
        log(2, "seed " + std::to_string(seed) + " task " + std::to_string(i) + ": " +
                   (res.metrics.solved ? "solved" : "failed") + " in " +
                   fmt(res.metrics.wall_time_s) + " s (" + std::to_string(done) + "/" +
                   std::to_string(rows.size()) + ")");
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    SeedSummary s{seed, 0.0, seconds_since(t0)};
    std::size_t solved = 0;
    for (const auto& r : rows) solved += r.metrics.solved;
    s.success = rows.empty() ? 0.0 : 100.0 * solved / static_cast<double>(rows.size());
    log(1, config.env + " seed " + std::to_string(seed) + ": " + fmt(s.success) + "% solved in " +
               fmt(s.eval_seconds, 1) + " s");
    report.seeds.push_back(s);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  return report;
}

void merge(MetricsReport& into, const MetricsReport& more) {
  into.rows.insert(into.rows.end(), more.rows.begin(), more.rows.end());
  into.seeds.insert(into.seeds.end(), more.seeds.begin(), more.seeds.end());
  into.learning_seconds += more.learning_seconds;
}

void write_csv(std::ostream& out, const MetricsReport& r) {
  out << "seed,task,solved,wall_time_s,nodes_created,plans_tried,samples_drawn,"
         "solution_length,timed_out\n";
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    out << row.seed << ',' << row.task << ',' << int(m.solved) << ',' << fmt(m.wall_time_s, 4)
        << ',' << m.nodes_created << ',' << m.plans_tried << ',' << m.samples_drawn << ','
        << m.solution_length << ',' << int(m.timed_out) << '\n';
  }
}

std::string summary(const MetricsReport& r) {
  std::ostringstream s;
  for (const auto& x : r.seeds) {
    s << "seed " << x.seed << ": " << fmt(x.success) << "% solved, eval " << fmt(x.eval_seconds, 1)
      << " s\n";
  }
  s << "mean " << fmt(r.mean()) << "% (stddev " << fmt(r.stddev()) << ") over " << r.seeds.size()
    << " seeds\n";
  if (r.learning_seconds > 0) s << "learning time " << fmt(r.learning_seconds, 1) << " s\n";
  return s.str();
}

std::string inspect(const Bundle& b) {
  std::ostringstream s;
  const auto& m = b.manifest;
  s << "env: " << b.env_name() << "\nseed: " << m.at("seed") << "\nmode: "
    << m.at("mode").get<std::string>() << "\nfilter: "
    << (m.at("filter_enabled").get<bool>() ? "on" : "off") << "\ndemos: " << m.at("n_demos")
    << " (fnv1a " << m.at("demos_fnv1a").get<std::string>() << ")\nsegments: "
    << m.at("n_segments") << "\ndataset sizes: " << m.at("dataset_sizes").dump()
    << "\nskills: " << b.skills.size() << "\n";
  for (std::size_t i = 0; i < b.skills.size(); ++i) {
    const auto& k = b.skills[i];
    s << "\n" << operators::render_operator(k.op);
    s << "  dataset size: " << k.dataset_size << "\n  horizon: " << k.horizon
      << "\n  static dims: " << json(k.static_dims).dump() << "\n  policy: " << shape(k.policy)
      << "\n  generator: " << shape(k.generator) << "\n  classifier: " << shape(k.classifier)
      << "\n";
  }
  return s.str();
}

}  // namespace tamp::harness
