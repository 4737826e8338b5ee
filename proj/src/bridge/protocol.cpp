#include "tamp/bridge/protocol.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace tamp::bridge {

using nlohmann::json;

namespace {

json box_json(const Box& b) {
  return {{"x_lo", b.x_lo}, {"x_hi", b.x_hi}, {"y_lo", b.y_lo}, {"y_hi", b.y_hi}};
}

Box box_from(const json& j) {
  return {j.at("x_lo").get<double>(), j.at("x_hi").get<double>(), j.at("y_lo").get<double>(),
          j.at("y_hi").get<double>()};
}

void only_keys(const json& j, std::set<std::string> allowed) {
  allowed.insert("type");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ProtocolError("unexpected field '" + k + "'");
  }
}

double finite(const json& j) {
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ProtocolError("non-finite number");
  return v;
}

struct ToJson {
  json operator()(const Start& m) const {
    json j = {{"type", "start"}};
    if (m.seed) j["seed"] = *m.seed;
    return j;
  }
  json operator()(const Snapshot& m) const {
    json objs = json::array();
    for (const auto& o : m.objects) {
      json f = json::array();
      for (const auto& [name, v] : o.features) f.push_back({name, v});
      objs.push_back({{"name", o.name}, {"type", o.type}, {"features", f}});
    }
    return {{"type", "snapshot"},
            {"session", m.session},
            {"objects", objs},
            {"atoms", m.atoms},
            {"goal", m.goal},
            {"reachable_zone", box_json(m.reachable_zone)},
            {"arena", box_json(m.arena)},
            {"geometry", m.geometry},
            {"status", m.status},
            {"steps", m.steps}};
  }
  json operator()(const Input& m) const {
    json j = {{"type", "input"}, {"kind", m.kind == Input::Kind::kMove ? "move" : "press_key"}};
    if (m.x) j["x"] = *m.x;
    if (m.y) j["y"] = *m.y;
    return j;
  }
  json operator()(const ActionMsg& m) const { return {{"type", "action"}, {"vector", m.vector}}; }
  json operator()(const Finish& m) const { return {{"type", "finish"}, {"outcome", m.outcome}}; }
  json operator()(const ErrorMsg& m) const {
    return {{"type", "error"}, {"code", m.code}, {"message", m.message}};
  }
};

Message from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  std::string type = j.at("type").get<std::string>();
  if (type == "start") {
    only_keys(j, {"seed"});
    Start m;
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) throw ProtocolError("seed must be a non-negative integer");
      m.seed = j.at("seed").get<std::uint64_t>();
    }
    return m;
  }
  if (type == "snapshot") {
    only_keys(j, {"session", "objects", "atoms", "goal", "reachable_zone", "arena", "geometry",
                  "status", "steps"});
    Snapshot m;
    m.session = j.at("session").get<std::string>();
    for (const auto& o : j.at("objects")) {
      ObjectView v{o.at("name").get<std::string>(), o.at("type").get<std::string>(), {}};
      for (const auto& f : o.at("features")) {
        v.features.emplace_back(f.at(0).get<std::string>(), finite(f.at(1)));
      }
      m.objects.push_back(std::move(v));
    }
    m.atoms = j.at("atoms").get<std::vector<std::string>>();
    m.goal = j.at("goal").get<std::vector<std::string>>();
    m.reachable_zone = box_from(j.at("reachable_zone"));
    m.arena = box_from(j.at("arena"));
    m.geometry = j.at("geometry").get<std::map<std::string, double>>();
    m.status = j.at("status").get<std::string>();
    m.steps = j.at("steps").get<std::size_t>();
    return m;
  }
  if (type == "input") {
    only_keys(j, {"kind", "x", "y"});
    Input m;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "move") {
      m.kind = Input::Kind::kMove;
      m.x = finite(j.at("x"));
      m.y = finite(j.at("y"));
    } else if (kind == "press_key") {
      m.kind = Input::Kind::kPressKey;
      if (j.contains("x") || j.contains("y")) throw ProtocolError("press_key takes no coordinates");
    } else {
      throw ProtocolError("unknown input kind '" + kind + "'");
    }
    return m;
  }
  if (type == "action") {
    only_keys(j, {"vector"});
    ActionMsg m;
    for (const auto& v : j.at("vector")) m.vector.push_back(finite(v));
    return m;
  }
  if (type == "finish") {
    only_keys(j, {"outcome"});
    Finish m{j.at("outcome").get<std::string>()};
    static const std::set<std::string> outcomes{"save", "discard", "saved", "discarded"};
    if (!outcomes.count(m.outcome)) throw ProtocolError("unknown outcome '" + m.outcome + "'");
    return m;
  }
  if (type == "error") {
    only_keys(j, {"code", "message"});
    return ErrorMsg{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

}  // namespace

std::string serialize(const Message& m) { return std::visit(ToJson{}, m).dump(); }

Message parse(std::string_view text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed message: ") + e.what());
  }
}

}  // namespace tamp::bridge
