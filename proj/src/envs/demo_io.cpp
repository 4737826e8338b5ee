#include "tamp/envs/demo_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "tamp/core/error.hpp"

namespace tamp::envs {

using nlohmann::json;

json state_to_json(const State& x) {
  json out = json::array();
  for (Object o : x.objects()) {
    auto f = x[o];
    out.push_back(std::vector<double>(f.begin(), f.end()));
  }
  return out;
}

State state_from_json(const json& j, std::span<const Object> objects) {
  if (!j.is_array() || j.size() != objects.size()) {
    throw FormatError("state must list one feature array per object");
  }
  std::vector<std::pair<Object, std::vector<double>>> entries;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto values = j[i].get<std::vector<double>>();
    if (values.size() != objects[i].type().dim()) {
      throw FormatError("object " + objects[i].name() + " has " +
                        std::to_string(values.size()) + " features, expected " +
                        std::to_string(objects[i].type().dim()));
    }
    entries.emplace_back(objects[i], std::move(values));
  }
  return State(std::move(entries));
}

json task_to_json(const Task& task) {
  json objects = json::array();
  for (Object o : task.init.objects()) {
    objects.push_back({{"name", o.name()}, {"type", o.type().name()}});
  }
  json goal = json::array();
  for (const auto& a : task.goal) goal.push_back(to_string(a));
  return {{"objects", objects},
          {"init", state_to_json(task.init)},
          {"goal", goal},
          {"horizon", task.horizon}};
}

Task task_from_json(const Environment& env, const json& j,
                    std::span<const Predicate> preds) {
  Task task;
  std::vector<Object> objects;
  for (const auto& o : j.at("objects")) {
    const ObjectType& t = env.type(o.at("type").get<std::string>());
    try {
      objects.push_back(Object::intern(o.at("name").get<std::string>(), t));
    } catch (const Error& e) {
      throw FormatError(e.what());
    }
  }
  task.init = state_from_json(j.at("init"), objects);
  task.objects = task.init.objects();
  std::vector<GroundAtom> goal;
  for (const auto& g : j.at("goal")) {
    goal.push_back(parse_ground_atom(g.get<std::string>(), preds, task.objects));
  }
  task.goal = GroundAtomSet(std::move(goal));
  task.horizon = j.value("horizon", 1000);
  if (task.horizon <= 0) throw FormatError("horizon must be positive");
  return task;
}

json demo_to_json(const Demonstration& demo) {
  json states = json::array();
  for (const auto& x : demo.states) states.push_back(state_to_json(x));
  return {{"task", task_to_json(demo.task)},
          {"states", states},
          {"actions", demo.actions}};
}

Demonstration demo_from_json(const Environment& env, const json& j,
                             std::span<const Predicate> preds) {
  Demonstration demo;
  demo.task = task_from_json(env, j.at("task"), preds);
  // Task objects are in canonical order, which is also the stored order.
  for (const auto& s : j.at("states")) {
    demo.states.push_back(state_from_json(s, demo.task.objects));
  }
  demo.actions = j.at("actions").get<std::vector<Action>>();
  return demo;
}

void write_demo_header(std::ostream& out, const Environment& env) {
  json header = {{"format", "tamp-demos"},
                 {"version", kDemoFormatVersion},
                 {"env", env.name()}};
  out << header.dump() << '\n';
}

void write_demo(std::ostream& out, const Demonstration& demo) {
  out << demo_to_json(demo).dump() << '\n';
}

std::vector<Demonstration> read_demos(std::istream& in, const Environment& env,
                                      std::span<const Predicate> preds) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<Demonstration> demos;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto where = [&] { return "line " + std::to_string(lineno) + ": "; };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(where() + e.what());
    }
    if (!header) {
      if (j.value("format", "") != "tamp-demos") {
        throw FormatError(where() + "missing demos header");
      }
      if (j.value("version", 0) != kDemoFormatVersion) {
        throw FormatError(where() + "unsupported demos version");
      }
      if (j.value("env", "") != env.name()) {
        throw FormatError(where() + "demos are for '" + j.value("env", "") +
                          "', expected '" + env.name() + "'");
      }
      header = true;
      continue;
    }
    Demonstration demo;
    try {
      demo = demo_from_json(env, j, preds);
    } catch (const json::exception& e) {
      throw FormatError(where() + e.what());
    } catch (const Error& e) {
      throw FormatError(where() + e.what());
    }
    if (auto reason = validate_demo(env, demo, preds); !reason.empty()) {
      throw FormatError(where() + reason);
    }
    demos.push_back(std::move(demo));
  }
  if (!header) throw FormatError("empty demos file (no header)");
  return demos;
}

std::vector<Demonstration> read_demos_file(const std::string& path,
                                           const Environment& env,
                                           std::span<const Predicate> preds) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_demos(in, env, preds);
}

}  // namespace tamp::envs
