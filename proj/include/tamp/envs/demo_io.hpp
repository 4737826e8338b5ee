#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tamp/envs/environment.hpp"

namespace tamp::envs {

/// Demonstration files are line-delimited JSON. The first line is a header
///   {"format":"tamp-demos","version":1,"env":"cover"}
/// and every following line is one record
///   {"task":{"objects":[{"name","type"}],"init":[[...]],"goal":["P(a,b)"],
///    "horizon":H},"states":[[[...]]],"actions":[[...]]}
/// Per-object arrays follow the order of "objects". Doubles are written in
/// shortest round-trip form.
inline constexpr int kDemoFormatVersion = 1;

nlohmann::json state_to_json(const State& x);
State state_from_json(const nlohmann::json& j, std::span<const Object> objects);

nlohmann::json task_to_json(const Task& task);
Task task_from_json(const Environment& env, const nlohmann::json& j,
                    std::span<const Predicate> preds);

nlohmann::json demo_to_json(const Demonstration& demo);
Demonstration demo_from_json(const Environment& env, const nlohmann::json& j,
                             std::span<const Predicate> preds);

void write_demo_header(std::ostream& out, const Environment& env);
void write_demo(std::ostream& out, const Demonstration& demo);

/// Reads a demos file. Every record is replay-checked against `env`; any
/// failure throws FormatError naming the line.
std::vector<Demonstration> read_demos(std::istream& in, const Environment& env,
                                      std::span<const Predicate> preds);
std::vector<Demonstration> read_demos_file(const std::string& path,
                                           const Environment& env,
                                           std::span<const Predicate> preds);

}  // namespace tamp::envs
