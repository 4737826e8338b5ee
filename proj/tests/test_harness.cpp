#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "tamp/envs/demo_io.hpp"
#include "tamp/harness/harness.hpp"

using namespace tamp;
using namespace tamp::harness;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("tamp_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Short schedules keep pipeline tests fast; behaviour is not under test.
ExperimentConfig quick(const std::string& env) {
  ExperimentConfig c;
  c.env = env;
  c.policy.epochs = 200;
  c.generator.epochs = 200;
  c.classifier.epochs = 200;
  c.n_eval_tasks = 3;
  c.timeout_s = 60;
  c.workers = 1;
  return c;
}

const Bundle& quick_cover_bundle() {
  static const Bundle b = train(quick("cover"), testing::corpus("cover", 30, 0), 0);
  return b;
}

}  // namespace

TEST_CASE("default config matches the published hyperparameters") {
  ExperimentConfig c;
  CHECK(c.env == "cover");
  CHECK(c.n_demos == 1000);
  CHECK(c.n_samples == 10);
  CHECK(c.planner_config().n_abstract == 8);
  c.env = "stick_button";
  CHECK(c.planner_config().n_abstract == 1000);
  CHECK(c.planner_config().n_samples == 10);
  CHECK(c.timeout_s == 300.0);
  CHECK(c.horizon == 1000);
  CHECK(c.n_eval_tasks == 50);
  for (const nn::TrainConfig* t : {&c.policy, &c.generator, &c.classifier}) {
    CHECK(t->hidden == std::vector<std::size_t>{32, 32});
    CHECK(t->lr == 1e-3);
  }
  CHECK(c.policy.epochs == 10000);
  CHECK(c.generator.epochs == 50000);
  CHECK(c.classifier.epochs == 10000);
  CHECK(c.rejection_tries == 100);
  CHECK(c.filter_enabled);
  CHECK(c.filter_fraction == 0.01);
  CHECK(c.mode() == skills::Mode::kSubgoal);
  auto sc = c.skill_config(7);
  CHECK(sc.seed == 7);
  CHECK(sc.generator.epochs == 50000);
  CHECK(sc.rejection_tries == 100);
}

TEST_CASE("config JSON: round trip, partial overrides, errors name the key") {
  ExperimentConfig c;
  c.env = "stick_button";
  c.seeds = {3, 4};
  c.n_abstract = 1;
  c.policy.epochs = 5;
  c.irrelevant.n_objects = 10;
  json j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);

  auto p = config_from_json(json::parse(R"({"generator": {"epochs": 7}, "n_abstract": null})"), c);
  CHECK(p.generator.epochs == 7);
  CHECK(p.generator.lr == 1e-3);
  CHECK_FALSE(p.n_abstract.has_value());
  CHECK(p.policy.epochs == 5);

  auto fails_with = [](const char* text, const std::string& needle) {
    try {
      config_from_json(json::parse(text));
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      return;
    }
    FAIL("no error for " << text);
  };
  fails_with(R"({"polcy": {}})", "polcy");
  fails_with(R"({"policy": {"epoch": 3}})", "policy.epoch");
  fails_with(R"({"n_samples": "ten"})", "n_samples");
  fails_with(R"({"env": "doors"})", "env");
  fails_with(R"({"no_subgoal": true, "pass_through": true})", "exclusive");
  CHECK_THROWS_AS(load_config(temp_path("missing.json")), ConfigError);
}

TEST_CASE("gen-demos: exact count, header only for zero, byte-identical reruns") {
  ExperimentConfig c;
  c.n_demos = 0;
  auto empty = temp_path("demos0.jsonl");
  generate_demos_file(c, 0, empty);
  std::string text = slurp(empty);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.find("tamp-demos") != std::string::npos);

  c.n_demos = 12;
  auto a = temp_path("demosA.jsonl"), b = temp_path("demosB.jsonl");
  generate_demos_file(c, 0, a);
  generate_demos_file(c, 0, b);
  CHECK(slurp(a) == slurp(b));
  const auto& env = envs::get_environment("cover");
  // The loader replays every record.
  CHECK(envs::read_demos_file(a, env, env.predicates()).size() == 12);
}

TEST_CASE("bundle: byte-identical round trip and deterministic training") {
  const Bundle& b = quick_cover_bundle();
  CHECK(b.skills.size() == 2);
  std::string text = bundle_to_string(b);
  CHECK(bundle_to_string(bundle_from_string(text)) == text);
  Bundle again = train(quick("cover"), testing::corpus("cover", 30, 0), 0);
  CHECK(bundle_to_string(again) == text);
  Bundle other_seed = train(quick("cover"), testing::corpus("cover", 30, 0), 1);
  CHECK(bundle_to_string(other_seed) != text);

  auto path = temp_path("bundle.json");
  save_bundle(b, path);
  CHECK(slurp(path) == text);
  CHECK(bundle_to_string(load_bundle(path)) == text);
  std::string report = inspect(b);
  CHECK(report.find("Operator cover-op0") != std::string::npos);
  CHECK(report.find("Operator cover-op1") != std::string::npos);
}

TEST_CASE("bundle: corrupt sections are named in the error") {
  json j = json::parse(bundle_to_string(quick_cover_bundle()));
  auto error_of = [](const json& doc) -> std::string {
    try {
      bundle_from_string(doc.dump());
    } catch (const FormatError& e) {
      return e.what();
    }
    return "";
  };
  json a = j;
  a.erase("operators");
  CHECK(error_of(a).find("'operators'") != std::string::npos);
  json b = j;
  b["manifest"]["env"] = "doors";
  CHECK(error_of(b).find("'manifest'") != std::string::npos);
  json c = j;
  c["skills"][1]["policy"]["sizes"] = "x";
  CHECK(error_of(c).find("'skills[1]'") != std::string::npos);
  json d = j;
  d["operators"][0] = d["operators"][1];
  CHECK(error_of(d).find("'skills[0]'") != std::string::npos);
  CHECK_THROWS_AS(bundle_from_string("{"), FormatError);
  CHECK_THROWS_AS(load_bundle(temp_path("nope.json")), FormatError);
}

TEST_CASE("evaluate refuses a bundle from another environment") {
  auto c = quick("stick_button");
  try {
    evaluate(c, quick_cover_bundle(), c.seeds);
    FAIL("expected a refusal");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cover") != std::string::npos);
  }
}

TEST_CASE("evaluate: no skills solves nothing; reruns give identical metrics") {
  Bundle empty = quick_cover_bundle();
  empty.skills.clear();
  auto c = quick("cover");
  std::vector<std::uint64_t> seeds{0, 1};
  auto r = evaluate(c, empty, seeds);
  CHECK(r.rows.size() == 6);
  CHECK(r.mean() == 0.0);
  CHECK(r.seeds.size() == 2);

  auto a = evaluate(c, quick_cover_bundle(), seeds);
  auto b = evaluate(c, quick_cover_bundle(), seeds);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto &x = a.rows[i].metrics, &y = b.rows[i].metrics;
    CHECK(x.solved == y.solved);
    CHECK(x.nodes_created == y.nodes_created);
    CHECK(x.plans_tried == y.plans_tried);
    CHECK(x.samples_drawn == y.samples_drawn);
    CHECK(x.solution_length == y.solution_length);
  }
  CHECK(a.mean() == b.mean());
  std::ostringstream csv;
  write_csv(csv, a);
  std::string text = csv.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  CHECK(summary(a).find("over 2 seeds") != std::string::npos);
}

TEST_CASE("train fails explicitly when filtering removes every dataset") {
  auto c = quick("cover");
  c.filter_fraction = 2.0;  // no dataset can hold twice the segments
  CHECK_THROWS_AS(train(c, testing::corpus("cover", 5, 0), 0), TrainingFailure);
}

TEST_CASE("eval tasks are seed-deterministic and use the configured horizon") {
  auto c = quick("stick_button");
  c.horizon = 321;
  Task a = eval_task(c, 4, 2), b = eval_task(c, 4, 2), d = eval_task(c, 5, 2);
  CHECK(a.init == b.init);
  CHECK_FALSE(a.init == d.init);
  CHECK(a.horizon == 321);
}
