#include "tamp/envs/stick_button.hpp"

#include <algorithm>
#include <cmath>

#include "tamp/core/error.hpp"
#include "tamp/util/rng.hpp"

namespace tamp::envs {
namespace {

struct Rect {
  double x_lo, x_hi, y_lo, y_hi;
};

bool circle_hits_rect(double cx, double cy, double r, const Rect& rect) {
  double nx = std::clamp(cx, rect.x_lo, rect.x_hi);
  double ny = std::clamp(cy, rect.y_lo, rect.y_hi);
  return (cx - nx) * (cx - nx) + (cy - ny) * (cy - ny) < r * r;
}

bool rects_overlap(const Rect& a, const Rect& b) {
  return a.x_lo < b.x_hi && b.x_lo < a.x_hi && a.y_lo < b.y_hi && b.y_lo < a.y_hi;
}

double dist(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

struct Scene {
  Object robot, stick, holder;
  std::vector<Object> buttons;
};

Scene find_objects(const StickButtonEnv& env, const State& x) {
  Scene s;
  for (Object o : x.objects()) {
    if (o.type() == env.robot_type()) s.robot = o;
    else if (o.type() == env.stick_type()) s.stick = o;
    else if (o.type() == env.holder_type()) s.holder = o;
    else if (o.type() == env.button_type()) s.buttons.push_back(o);
  }
  if (!s.robot.valid() || !s.stick.valid() || !s.holder.valid()) {
    throw ContractViolation("stick_button state needs a robot, stick and holder");
  }
  return s;
}

}  // namespace

StickButtonEnv::StickButtonEnv(StickButtonConfig config) : config_(config) {
  types_ = {
      ObjectType::intern("robot", {"x", "y"}),
      ObjectType::intern("button", {"x", "y", "pressed"}),
      ObjectType::intern("stick", {"x", "y", "held"}),
      ObjectType::intern("holder", {"x", "y"}),
  };
  const ObjectType robot = types_[0], button = types_[1], stick = types_[2];
  const double pr = config_.press_radius;

  auto robot_above = [pr](const State& x, Object r, Object b) {
    return dist(x.get(r, kRX), x.get(r, kRY), x.get(b, kBX), x.get(b, kBY)) <= pr;
  };
  auto stick_above = [this, pr](const State& x, Object s, Object b) {
    auto [hx, hy] = stick_head(x[s]);
    return dist(hx, hy, x.get(b, kBX), x.get(b, kBY)) <= pr;
  };

  preds_.emplace_back(
      "Pressed", std::vector{button},
      [](const State& x, std::span<const Object> o) {
        return x.get(o[0], kPressed) > 0.5;
      },
      true);
  preds_.emplace_back(
      "RobotAboveButton", std::vector{robot, button},
      [robot_above](const State& x, std::span<const Object> o) {
        return robot_above(x, o[0], o[1]);
      });
  preds_.emplace_back(
      "StickAboveButton", std::vector{stick, button},
      [stick_above](const State& x, std::span<const Object> o) {
        return stick_above(x, o[0], o[1]);
      });
  preds_.emplace_back(
      "AboveNoButton", std::vector{robot},
      [this, robot_above, stick_above](const State& x, std::span<const Object> o) {
        for (Object b : x.objects()) {
          if (b.type() != button_type()) continue;
          if (robot_above(x, o[0], b)) return false;
          for (Object s : x.objects()) {
            if (s.type() == stick_type() && stick_above(x, s, b)) return false;
          }
        }
        return true;
      });
  preds_.emplace_back(
      "Grasped", std::vector{robot, stick},
      [](const State& x, std::span<const Object> o) {
        return x.get(o[1], kHeld) > 0.5;
      },
      true);
  preds_.emplace_back(
      "HandEmpty", std::vector{robot},
      [this](const State& x, std::span<const Object>) {
        for (Object s : x.objects()) {
          if (s.type() == stick_type() && x.get(s, kHeld) > 0.5) return false;
        }
        return true;
      });
}

bool StickButtonEnv::reachable(double button_y) const {
  return button_y <= config_.reach_y;
}

std::pair<double, double> StickButtonEnv::stick_head(
    std::span<const double> stick) const {
  return {stick[kSX], stick[kSY] + config_.stick_length};
}

bool StickButtonEnv::robot_hits_holder(double rx, double ry,
                                       std::span<const double> holder) const {
  const auto& c = config_;
  Rect h{holder[kHX] - c.holder_width / 2, holder[kHX] + c.holder_width / 2,
         holder[kHY] - c.holder_height / 2, holder[kHY] + c.holder_height / 2};
  return circle_hits_rect(rx, ry, c.robot_radius, h);
}

bool StickButtonEnv::stick_hits_holder(std::span<const double> stick,
                                       std::span<const double> holder) const {
  const auto& c = config_;
  Rect h{holder[kHX] - c.holder_width / 2, holder[kHX] + c.holder_width / 2,
         holder[kHY] - c.holder_height / 2, holder[kHY] + c.holder_height / 2};
  Rect s{stick[kSX] - c.stick_width / 2, stick[kSX] + c.stick_width / 2,
         stick[kSY], stick[kSY] + c.stick_length};
  return rects_overlap(h, s);
}

State StickButtonEnv::step(const State& x, std::span<const double> action) const {
  if (action.size() != action_dim()) {
    throw ContractViolation("stick_button expects a 3-dimensional action");
  }
  const auto& c = config_;
  auto finite = [](double v) { return std::isfinite(v) ? v : 0.0; };
  double dx = std::clamp(finite(action[0]), -c.max_step, c.max_step);
  double dy = std::clamp(finite(action[1]), -c.max_step, c.max_step);
  double force = finite(action[2]);

  Scene scene = find_objects(*this, x);
  State next = x;
  auto r = next.features(scene.robot);
  auto s = next.features(scene.stick);
  auto h = x[scene.holder];
  double rx = std::clamp(r[kRX] + dx, 0.0, 1.0);
  double ry = std::clamp(r[kRY] + dy, 0.0, c.reach_y);
  bool held = s[kHeld] > 0.5;
  if (held) {
    s[kSX] += rx - r[kRX];
    s[kSY] += ry - r[kRY];
  }
  r[kRX] = rx;
  r[kRY] = ry;
  if (force <= c.force_threshold) return next;

  if (!held && std::abs(rx - s[kSX]) <= c.grasp_x_tolerance &&
      ry >= s[kSY] && ry <= s[kSY] + c.stick_length) {
    if (!robot_hits_holder(rx, ry, h)) s[kHeld] = 1.0;
    return next;
  }
  bool robot_clear = !robot_hits_holder(rx, ry, h);
  bool stick_clear = held && !stick_hits_holder(s, h);
  auto [hx, hy] = stick_head(s);
  for (Object b : scene.buttons) {
    auto bf = next.features(b);
    if (bf[kPressed] > 0.5) continue;
    bool by_robot = robot_clear && dist(rx, ry, bf[kBX], bf[kBY]) <= c.press_radius;
    bool by_stick = stick_clear && dist(hx, hy, bf[kBX], bf[kBY]) <= c.press_radius;
    if (by_robot || by_stick) bf[kPressed] = 1.0;
  }
  return next;
}

Task StickButtonEnv::sample_task(std::uint64_t seed, Profile profile) const {
  const auto& c = config_;
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(profile), 0x57CBULL}));
  const Predicate& pressed = preds_[0];
  int lo = profile == Profile::kTrain ? c.train_buttons_lo : c.eval_buttons_lo;
  int hi = profile == Profile::kTrain ? c.train_buttons_hi : c.eval_buttons_hi;
  const double gap = c.press_radius + 0.01;

  for (int attempt = 0; attempt < 10000; ++attempt) {
    int n = std::uniform_int_distribution<int>(lo, hi)(rng);
    double hx = uniform(rng, 0.1, 0.9);
    double sy = uniform(rng, c.stick_base_lo, c.stick_base_hi);
    double hy = sy + c.holder_height / 2;
    std::vector<double> holder{hx, hy};
    std::vector<double> stick{hx, sy, 0.0};

    std::vector<std::pair<double, double>> buttons;
    for (int t = 0; t < 1000 && static_cast<int>(buttons.size()) < n; ++t) {
      double bx = uniform(rng, 0.05, 0.95);
      double by = uniform(rng, c.button_y_lo, c.button_y_hi);
      // Keep reachability unambiguous.
      if (by > c.reach_y - 0.01 && by <= c.reach_y + c.press_radius + 0.01) continue;
      if (std::abs(bx - hx) < c.press_radius + 0.05) continue;
      if (robot_hits_holder(bx, by, holder) ||
          circle_hits_rect(bx, by, c.robot_radius + c.press_radius + 0.02,
                           {hx - c.holder_width / 2, hx + c.holder_width / 2,
                            hy - c.holder_height / 2, hy + c.holder_height / 2})) {
        continue;
      }
      bool ok = true;
      for (auto [ox, oy] : buttons) {
        if (dist(bx, by, ox, oy) < c.button_separation) ok = false;
      }
      if (ok) buttons.emplace_back(bx, by);
    }
    if (static_cast<int>(buttons.size()) < n) continue;

    double rx = 0, ry = 0;
    bool placed = false;
    for (int t = 0; t < 1000 && !placed; ++t) {
      rx = uniform(rng, 0.05, 0.95);
      ry = uniform(rng, 0.05, c.reach_y - 0.05);
      placed = std::abs(rx - hx) > c.grasp_x_tolerance + 0.03;
      for (auto [bx, by] : buttons) {
        if (dist(rx, ry, bx, by) < c.press_radius + gap) placed = false;
      }
    }
    if (!placed) continue;

    std::vector<std::pair<Object, std::vector<double>>> entries;
    entries.emplace_back(Object::intern("robot", robot_type()), std::vector{rx, ry});
    entries.emplace_back(Object::intern("stick", stick_type()), stick);
    entries.emplace_back(Object::intern("holder", holder_type()), holder);
    std::vector<GroundAtom> goal;
    for (int i = 0; i < n; ++i) {
      Object b = Object::intern("button" + std::to_string(i + 1), button_type());
      entries.emplace_back(b, std::vector{buttons[i].first, buttons[i].second, 0.0});
      goal.emplace_back(pressed, std::vector{b});
    }
    Task task;
    task.init = State(std::move(entries));
    task.objects = task.init.objects();
    task.goal = GroundAtomSet(std::move(goal));
    task.horizon = 1000;
    return task;
  }
  throw Error("stick_button: could not sample a task");
}

std::optional<Demonstration> StickButtonEnv::scripted_demo(const Task& task) const {
  const auto& c = config_;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : task.init.values()) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  }
  Rng rng(h);
  Demonstration demo;
  demo.task = task;
  demo.states.push_back(task.init);
  Scene scene = find_objects(*this, task.init);

  auto move_robot_to = [&](double tx, double ty) -> bool {
    for (int guard = 0; guard < 100; ++guard) {
      const State& x = demo.states.back();
      double dx = tx - x.get(scene.robot, kRX), dy = ty - x.get(scene.robot, kRY);
      bool arrive = std::abs(dx) <= c.max_step + 1e-12 &&
                    std::abs(dy) <= c.max_step + 1e-12;
      Action u{std::clamp(dx, -c.max_step, c.max_step),
               std::clamp(dy, -c.max_step, c.max_step), 0.0};
      demo.actions.push_back(u);
      demo.states.push_back(step(demo.states.back(), u));
      if (arrive) break;
    }
    // Push on a separate, stationary step.
    demo.actions.push_back({0.0, 0.0, 1.0});
    demo.states.push_back(step(demo.states.back(), demo.actions.back()));
    return static_cast<int>(demo.actions.size()) <= task.horizon;
  };
  auto pressed = [&](Object b) { return demo.states.back().get(b, kPressed) > 0.5; };

  // Greedy nearest-first ordering from a moving reference point.
  auto order = [&](std::vector<Object> bs, auto position) {
    std::vector<Object> out;
    while (!bs.empty()) {
      auto [px, py] = position(out);
      auto it = std::min_element(bs.begin(), bs.end(), [&](Object a, Object b) {
        const State& x0 = task.init;
        return dist(px, py, x0.get(a, kBX), x0.get(a, kBY)) <
               dist(px, py, x0.get(b, kBX), x0.get(b, kBY));
      });
      out.push_back(*it);
      bs.erase(it);
    }
    return out;
  };

  std::vector<Object> near, far;
  for (const auto& atom : task.goal) {
    if (atom.predicate.name() != "Pressed") return std::nullopt;
    Object b = atom.objects[0];
    (reachable(task.init.get(b, kBY)) ? near : far).push_back(b);
  }
  const State& x0 = task.init;
  near = order(near, [&](const std::vector<Object>& done) {
    if (done.empty()) return std::pair{x0.get(scene.robot, kRX), x0.get(scene.robot, kRY)};
    return std::pair{x0.get(done.back(), kBX), x0.get(done.back(), kBY)};
  });
  for (Object b : near) {
    if (!move_robot_to(x0.get(b, kBX), x0.get(b, kBY))) return std::nullopt;
    if (!pressed(b)) return std::nullopt;
  }

  if (!far.empty()) {
    double sx = x0.get(scene.stick, kSX), sy = x0.get(scene.stick, kSY);
    double top = 0.0;
    for (Object b : far) top = std::max(top, x0.get(b, kBY));
    // Grasp low enough on the stick that its head reaches the highest button
    // while the robot stays in its zone.
    double hi = std::min(c.reach_y - sy, c.reach_y + c.stick_length - top) - 0.01;
    if (hi <= c.demo_grasp_lo) return std::nullopt;
    double offset = uniform(rng, c.demo_grasp_lo, hi);
    if (!move_robot_to(sx, sy + offset)) return std::nullopt;
    if (demo.states.back().get(scene.stick, kHeld) < 0.5) return std::nullopt;
    far = order(far, [&](const std::vector<Object>& done) {
      if (done.empty()) return std::pair{sx, sy + c.stick_length};
      return std::pair{x0.get(done.back(), kBX), x0.get(done.back(), kBY)};
    });
    for (Object b : far) {
      const State& x = demo.states.back();
      double grip = x.get(scene.robot, kRY) - x.get(scene.stick, kSY);
      double ty = x0.get(b, kBY) - c.stick_length + grip;
      if (!move_robot_to(x0.get(b, kBX), ty)) return std::nullopt;
      if (!pressed(b)) return std::nullopt;
    }
  }
  if (!goal_holds(task.goal, abstract(demo.states.back()))) return std::nullopt;
  return demo;
}

}  // namespace tamp::envs
