#include "tamp/bridge/session.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "tamp/envs/demo_io.hpp"

namespace tamp::bridge {

namespace {

const envs::StickButtonEnv& stick_button() {
  return dynamic_cast<const envs::StickButtonEnv&>(envs::get_environment("stick_button"));
}

std::vector<std::string> atom_strings(const GroundAtomSet& atoms) {
  std::vector<std::string> out;
  for (const auto& a : atoms) out.push_back(to_string(a));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::kActive: return "active";
    case Status::kDone: return "done";
    case Status::kAbandoned: return "abandoned";
  }
  return "?";
}

DemoSession::DemoSession(std::string id, std::uint64_t seed)
    : id_(std::move(id)), env_(stick_button()) {
  demo_.task = env_.sample_task(seed, envs::Profile::kTrain);
  demo_.states.push_back(demo_.task.init);
  if (goal_holds(demo_.task.goal, env_.abstract(demo_.task.init))) status_ = Status::kDone;
}

Snapshot DemoSession::snapshot() const {
  const State& x = demo_.states.back();
  const auto& c = env_.config();
  Snapshot s;
  s.session = id_;
  for (Object o : x.objects()) {
    ObjectView v{o.name(), o.type().name(), {}};
    auto f = x[o];
    for (std::size_t i = 0; i < f.size(); ++i) v.features.emplace_back(o.type().features()[i], f[i]);
    s.objects.push_back(std::move(v));
  }
  s.atoms = atom_strings(env_.abstract(x));
  s.goal = atom_strings(demo_.task.goal);
  s.reachable_zone = {0.0, 1.0, 0.0, c.reach_y};
  s.arena = {0.0, 1.0, 0.0, 1.0};
  s.geometry = {{"robot_radius", c.robot_radius},   {"press_radius", c.press_radius},
                {"stick_length", c.stick_length},   {"stick_width", c.stick_width},
                {"holder_width", c.holder_width},   {"holder_height", c.holder_height},
                {"max_step", c.max_step}};
  s.status = to_string(status_);
  s.steps = demo_.actions.size();
  return s;
}

Action DemoSession::translate(const Input& in) const {
  if (in.kind == Input::Kind::kPressKey) return {0.0, 0.0, 1.0};
  const State& x = demo_.states.back();
  Object robot = x.objects().front();
  for (Object o : x.objects()) {
    if (o.type() == env_.robot_type()) robot = o;
  }
  double dx = *in.x - x.get(robot, envs::StickButtonEnv::kRX);
  double dy = *in.y - x.get(robot, envs::StickButtonEnv::kRY);
  double norm = std::hypot(dx, dy);
  double max = env_.config().max_step;
  if (norm > max) {
    dx *= max / norm;
    dy *= max / norm;
  }
  return {dx, dy, 0.0};
}

Snapshot DemoSession::step(const Action& a) {
  if (status_ != Status::kActive) {
    throw SessionError("session_state", "session is " + to_string(status_));
  }
  if (static_cast<int>(demo_.actions.size()) >= demo_.task.horizon) {
    throw SessionError("session_state", "task horizon reached");
  }
  demo_.actions.push_back(a);
  demo_.states.push_back(env_.step(demo_.states.back(), a));
  if (goal_holds(demo_.task.goal, env_.abstract(demo_.states.back()))) status_ = Status::kDone;
  return snapshot();
}

Snapshot DemoSession::apply(const Input& in) { return step(translate(in)); }

Snapshot DemoSession::apply(const ActionMsg& a) {
  if (a.vector.size() != env_.action_dim()) {
    throw SessionError("bad_message", "action must have " + std::to_string(env_.action_dim()) +
                                          " components");
  }
  return step(a.vector);
}

std::optional<Demonstration> DemoSession::finish(const std::string& outcome) {
  if (outcome == "discard") {
    status_ = Status::kAbandoned;
    return std::nullopt;
  }
  if (outcome != "save") throw SessionError("bad_message", "outcome must be save or discard");
  if (status_ != Status::kDone) {
    throw SessionError("session_state", "only a session that reached its goal can be saved");
  }
  std::string why = envs::validate_demo(env_, demo_, env_.predicates());
  if (!why.empty()) throw SessionError("internal", "recording failed validation: " + why);
  return demo_;
}

void DemoWriter::append(const Demonstration& demo) {
  std::lock_guard lock(mu_);
  std::error_code ec;
  bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw SessionError("internal", "cannot open demos file '" + path_ + "'");
  if (fresh) envs::write_demo_header(out, stick_button());
  envs::write_demo(out, demo);
  out.flush();
  if (!out) throw SessionError("internal", "failed writing demos file '" + path_ + "'");
  ++appended_;
}

std::size_t DemoWriter::appended() const {
  std::lock_guard lock(mu_);
  return appended_;
}

}  // namespace tamp::bridge
