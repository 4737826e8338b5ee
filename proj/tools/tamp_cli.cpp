// Command-line front end: gen-demos, train, eval, inspect, serve-demo.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "tamp/bridge/server.hpp"
#include "tamp/envs/demo_io.hpp"
#include "tamp/harness/harness.hpp"

using namespace tamp;
using namespace tamp::harness;
using nlohmann::json;

namespace {

// Flags are collected into a JSON patch applied over the config file, so
// both go through the same validation.
struct Overrides {
  std::string config_path;
  json patch = json::object();

  template <typename T>
  void add(CLI::App& app, const std::string& flag, const std::string& key,
           const std::string& help) {
    app.add_option_function<T>(
        flag, [this, key](const T& v) { set(key, json(v)); }, help);
  }
  void add_switch(CLI::App& app, const std::string& flag, const std::string& key, bool value,
                  const std::string& help) {
    app.add_flag_callback(flag, [this, key, value] { set(key, value); }, help);
  }
  void set(const std::string& key, json v) {
    json* at = &patch;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
      at = &(*at)[key.substr(start, dot - start)];
    }
    (*at)[key.substr(start)] = std::move(v);
  }

  ExperimentConfig resolve(ExperimentConfig base = {}) const {
    if (!config_path.empty()) base = load_config(config_path);
    return config_from_json(patch, base);
  }
};

void add_config_flags(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON config file; flags override it");
  o.add<std::string>(app, "--env", "env", "cover or stick_button");
  o.add<std::size_t>(app, "--demos-count", "n_demos", "number of demonstrations");
  o.add<std::vector<std::uint64_t>>(app, "--seeds", "seeds", "seeds (space separated)");
  o.add<int>(app, "--n-abstract", "n_abstract", "abstract plans per task");
  o.add<int>(app, "--n-samples", "n_samples", "sampler draws per plan step");
  o.add<std::size_t>(app, "--max-nodes", "max_nodes", "search node budget");
  o.add<double>(app, "--timeout", "timeout_s", "planning timeout per task (s)");
  o.add<int>(app, "--horizon", "horizon", "evaluation task horizon");
  o.add<std::size_t>(app, "--eval-tasks", "n_eval_tasks", "evaluation tasks per seed");
  o.add<int>(app, "--policy-epochs", "policy.epochs", "policy training epochs");
  o.add<int>(app, "--generator-epochs", "generator.epochs", "generator training epochs");
  o.add<int>(app, "--classifier-epochs", "classifier.epochs", "classifier training epochs");
  o.add<int>(app, "--rejection-tries", "rejection_tries", "sampler rejection tries");
  o.add_switch(app, "--no-subgoal", "no_subgoal", true, "policies without subgoals");
  o.add_switch(app, "--pass-through", "pass_through", true, "single-step skills");
  o.add_switch(app, "--no-filter", "filter_enabled", false, "keep low-data skills");
  o.add<double>(app, "--filter-fraction", "filter_fraction", "low-data threshold");
  o.add<int>(app, "--irrelevant-objects", "irrelevant.objects", "extra eval-time blocks");
  o.add<int>(app, "--irrelevant-static", "irrelevant.static_predicates", "");
  o.add<int>(app, "--irrelevant-dynamic", "irrelevant.dynamic_predicates", "");
  o.add<int>(app, "--irrelevant-random", "irrelevant.random_predicates", "");
  o.add<int>(app, "--workers", "workers", "worker threads (0: all)");
}

std::uint64_t pick_seed(const ExperimentConfig& c, const std::optional<std::uint64_t>& s) {
  return s ? *s : c.seeds.front();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn neuro-symbolic skills from demonstrations and plan with them"};
  app.require_subcommand(1);

  Overrides gen_o, train_o, eval_o;
  std::string demos_out, demos_in, bundle_out, bundle_in, report_out, csv_out, summary_out;
  std::optional<std::uint64_t> gen_seed, train_seed;

  auto* gen = app.add_subcommand("gen-demos", "write scripted demonstrations");
  add_config_flags(*gen, gen_o);
  gen->add_option("--out", demos_out, "demos file")->required();
  gen->add_option("--seed", gen_seed, "demo seed (default: first of --seeds)");

  auto* tr = app.add_subcommand("train", "learn a skill bundle from demonstrations");
  add_config_flags(*tr, train_o);
  tr->add_option("--demos", demos_in, "demos file")->required();
  tr->add_option("--out", bundle_out, "bundle file")->required();
  tr->add_option("--report", report_out, "training report (JSON)");
  tr->add_option("--seed", train_seed, "training seed (default: first of --seeds)");

  auto* ev = app.add_subcommand("eval", "plan on evaluation tasks with a bundle");
  add_config_flags(*ev, eval_o);
  ev->add_option("--bundle", bundle_in, "bundle file")->required();
  ev->add_option("--csv", csv_out, "per-task metrics CSV");
  ev->add_option("--summary", summary_out, "summary text (default: stdout)");

  std::string inspect_in;
  auto* in = app.add_subcommand("inspect", "describe a bundle");
  in->add_option("bundle", inspect_in, "bundle file")->required();

  bridge::ServerOptions serve;
  auto* sd = app.add_subcommand("serve-demo", "collect Stick Button demonstrations interactively");
  sd->add_option("--port", serve.port, "TCP port (0: any free port)");
  sd->add_option("--host", serve.host, "listen address");
  sd->add_option("--out", serve.demos_path, "demos file to append to")->required();
  sd->add_option("--seed-base", serve.seed_base, "seed for the first session");
  sd->add_option("--static-dir", serve.static_dir, "directory served over HTTP");
  sd->add_option("--idle-timeout", serve.idle_timeout_s, "seconds before an idle session ends");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      auto c = gen_o.resolve();
      std::size_t skipped = generate_demos_file(c, pick_seed(c, gen_seed), demos_out);
      std::cout << "wrote " << c.n_demos << " demonstrations to " << demos_out << " (skipped "
                << skipped << " tasks the demonstrator failed)\n";
    } else if (*tr) {
      auto c = train_o.resolve();
      const auto& env = envs::get_environment(c.env);
      auto demos = envs::read_demos_file(demos_in, env, env.predicates());
      TrainReport report;
      auto bundle = train(c, demos, pick_seed(c, train_seed), &report);
      save_bundle(bundle, bundle_out);
      if (!report_out.empty()) {
        std::ofstream(report_out) << report_to_json(report).dump(1) << '\n';
      }
      std::cout << "trained " << bundle.skills.size() << " skills in " << report.seconds
                << " s; wrote " << bundle_out << '\n';
    } else if (*ev) {
      auto bundle = load_bundle(bundle_in);
      // The bundle's training config is the base; the file and flags override.
      auto c = eval_o.resolve(config_from_json(bundle.manifest.at("config")));
      auto report = evaluate(c, bundle, c.seeds);
      if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        write_csv(out, report);
      }
      if (summary_out.empty()) {
        std::cout << summary(report);
      } else {
        std::ofstream(summary_out) << summary(report);
      }
    } else if (*in) {
      std::cout << inspect(load_bundle(inspect_in));
    } else if (*sd) {
      bridge::run_server(serve);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
