#include "tamp/envs/cover.hpp"

#include <algorithm>
#include <cmath>

#include "tamp/core/error.hpp"
#include "tamp/util/rng.hpp"

namespace tamp::envs {
namespace {

constexpr double kOnTable = 1e-9;

bool is_held(std::span<const double> block) {
  return block[CoverEnv::kGrasp] > -0.5;
}

struct Interval {
  double lo, hi;
  bool empty(double margin = 0.0) const { return hi - lo < margin; }
  Interval shrink(double m) const { return {lo + m, hi - m}; }
  Interval intersect(Interval o) const {
    return {std::max(lo, o.lo), std::min(hi, o.hi)};
  }
};

std::uint64_t state_fingerprint(const State& x) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Object o : x.objects()) h = fnv1a(o.name(), h);
  for (double v : x.values()) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  }
  return h;
}

}  // namespace

CoverEnv::CoverEnv(CoverConfig config) : config_(config) {
  types_ = {
      ObjectType::intern("block", {"height", "width", "x", "y", "grasp"}),
      ObjectType::intern("target", {"width", "x"}),
      ObjectType::intern("gripper", {"x", "y", "grip", "holding"}),
      ObjectType::intern("allowed-region", {"lower-bound-x", "upper-bound-x"}),
  };
  const ObjectType block = types_[0], target = types_[1], gripper = types_[2];

  preds_.emplace_back(
      "Covers", std::vector{block, target},
      [](const State& x, std::span<const Object> o) {
        auto b = x[o[0]];
        auto t = x[o[1]];
        if (is_held(b) || b[kBY] > kOnTable) return false;
        double b_lo = b[kBX] - b[kWidth] / 2, b_hi = b[kBX] + b[kWidth] / 2;
        double t_lo = t[kTX] - t[kTWidth] / 2, t_hi = t[kTX] + t[kTWidth] / 2;
        return b_lo <= t_lo && b_hi >= t_hi;
      },
      true);
  preds_.emplace_back(
      "HandEmpty", std::vector{gripper},
      [](const State& x, std::span<const Object> o) {
        return x.get(o[0], kHolding) < 0.5;
      },
      true);
  preds_.emplace_back(
      "Holding", std::vector{gripper, block},
      [](const State& x, std::span<const Object> o) {
        return x.get(o[0], kHolding) > 0.5 && is_held(x[o[1]]);
      },
      true);
  preds_.emplace_back("IsBlock", std::vector{block},
                      [](const State&, std::span<const Object>) { return true; });
  preds_.emplace_back("IsTarget", std::vector{target},
                      [](const State&, std::span<const Object>) { return true; });
}

bool CoverEnv::in_allowed_region(const State& x, double gx) const {
  for (Object o : x.objects()) {
    if (o.type() != region_type()) continue;
    auto r = x[o];
    if (gx >= r[kLower] && gx <= r[kUpper]) return true;
  }
  return false;
}

State CoverEnv::step(const State& x, std::span<const double> action) const {
  if (action.size() != action_dim()) {
    throw ContractViolation("cover expects a 3-dimensional action");
  }
  const auto& c = config_;
  double dx = std::clamp(action[0], -c.max_step, c.max_step);
  double dy = std::clamp(action[1], -c.max_step, c.max_step);
  double dgrip = std::clamp(action[2], -c.max_grip_delta, c.max_grip_delta);
  if (!std::isfinite(dx)) dx = 0.0;
  if (!std::isfinite(dy)) dy = 0.0;
  if (!std::isfinite(dgrip)) dgrip = 0.0;

  State next = x;
  Object gripper;
  std::optional<Object> held;
  for (Object o : x.objects()) {
    if (o.type() == gripper_type()) gripper = o;
    if (o.type() == block_type() && is_held(x[o])) held = o;
  }
  if (!gripper.valid()) throw ContractViolation("cover state has no gripper");

  auto g = next.features(gripper);
  double gx = std::clamp(g[kGX] + dx, 0.0, 1.0);
  double floor = 0.0;
  if (held) {
    floor = x.get(*held, kHeight);
  } else {
    // An empty gripper rests on top of any block below it.
    for (Object o : x.objects()) {
      if (o.type() != block_type()) continue;
      auto b = x[o];
      if (std::abs(gx - b[kBX]) <= b[kWidth] / 2) {
        floor = std::max(floor, b[kBY] + b[kHeight]);
      }
    }
  }
  double gy = std::clamp(g[kGY] + dy, floor, std::max(1.0, floor));
  g[kGX] = gx;
  g[kGY] = gy;
  g[kGrip] = std::clamp(g[kGrip] + dgrip, -1.0, 1.0);

  if (held) {
    auto b = next.features(*held);
    b[kBX] = gx - b[kGrasp];
    b[kBY] = gy - b[kHeight];
  }

  if (!held && g[kGrip] > c.grip_threshold) {
    for (Object o : x.objects()) {
      if (o.type() != block_type()) continue;
      auto b = next.features(o);
      if (b[kBY] > kOnTable) continue;
      bool over = std::abs(gx - b[kBX]) <= b[kWidth] / 2;
      bool on_top = gy - b[kHeight] <= c.grasp_y_tolerance;
      if (over && on_top && in_allowed_region(x, gx)) {
        b[kGrasp] = gx - b[kBX];
        g[kHolding] = 1.0;
        break;
      }
    }
  } else if (held && g[kGrip] < -c.grip_threshold) {
    auto b = next.features(*held);
    if (in_allowed_region(x, gx) && b[kBY] <= c.grasp_y_tolerance) {
      b[kBY] = 0.0;
      b[kGrasp] = -1.0;
      g[kHolding] = 0.0;
    }
  }
  return next;
}

Task CoverEnv::sample_task(std::uint64_t seed, Profile profile) const {
  const auto& c = config_;
  Rng rng(derive_seed({seed, static_cast<std::uint64_t>(profile), 0xC0DEULL}));
  const Predicate& covers = preds_[0];
  for (int attempt = 0; attempt < 100000; ++attempt) {
    double bw[2], bh[2], tw[2];
    for (int i = 0; i < 2; ++i) {
      bw[i] = uniform(rng, c.block_width_lo, c.block_width_hi);
      bh[i] = uniform(rng, c.block_height_lo, c.block_height_hi);
      tw[i] = uniform(rng, c.target_width_lo, c.target_width_hi);
    }
    // Spans 0,1 are blocks, 2,3 targets.
    double widths[4] = {bw[0], bw[1], tw[0], tw[1]};
    double centers[4];
    bool placed = true;
    for (int i = 0; i < 4 && placed; ++i) {
      placed = false;
      for (int t = 0; t < 200 && !placed; ++t) {
        double cx = uniform(rng, widths[i] / 2, 1.0 - widths[i] / 2);
        bool ok = true;
        for (int j = 0; j < i; ++j) {
          if (std::abs(cx - centers[j]) < (widths[i] + widths[j]) / 2 + c.gap) {
            ok = false;
          }
        }
        if (ok) {
          centers[i] = cx;
          placed = true;
        }
      }
    }
    if (!placed) continue;
    // No block may be wide enough to cover both targets at once.
    double extent = std::max(centers[2] + tw[0] / 2, centers[3] + tw[1] / 2) -
                    std::min(centers[2] - tw[0] / 2, centers[3] - tw[1] / 2);
    if (extent <= std::max(bw[0], bw[1]) + 0.01) continue;

    int perm[2] = {0, 1};
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) std::swap(perm[0], perm[1]);

    Interval block_regions[2], target_regions[2];
    for (int i = 0; i < 2; ++i) {
      double width = uniform(rng, c.block_region_frac_lo, c.block_region_frac_hi) * bw[i];
      double lo = uniform(rng, centers[i] - bw[i] / 2, centers[i] + bw[i] / 2 - width);
      block_regions[i] = {lo, lo + width};
      double twidth = uniform(rng, c.target_region_frac_lo, c.target_region_frac_hi) * tw[i];
      double center = centers[2 + i] + uniform(rng, -0.25, 0.25) * tw[i];
      target_regions[i] = {center - twidth / 2, center + twidth / 2};
    }
    bool feasible = true;
    for (int i = 0; i < 2; ++i) {
      int t = perm[i];
      double slack = (bw[i] - tw[t]) / 2;
      Interval grasp = block_regions[i].intersect(
          {centers[i] - bw[i] / 2, centers[i] + bw[i] / 2});
      grasp = {grasp.lo - centers[i], grasp.hi - centers[i]};
      grasp = grasp.intersect({target_regions[t].lo - centers[2 + t] - slack,
                               target_regions[t].hi - centers[2 + t] + slack});
      if (grasp.empty(0.02)) feasible = false;
    }
    if (!feasible) continue;

    std::vector<std::pair<Object, std::vector<double>>> entries;
    std::vector<Object> blocks, targets;
    for (int i = 0; i < 2; ++i) {
      Object b = Object::intern("block" + std::to_string(i + 1), block_type());
      entries.emplace_back(b, std::vector{bh[i], bw[i], centers[i], 0.0, -1.0});
      blocks.push_back(b);
      Object t = Object::intern("target" + std::to_string(i + 1), target_type());
      entries.emplace_back(t, std::vector{tw[i], centers[2 + i]});
      targets.push_back(t);
    }
    entries.emplace_back(Object::intern("gripper", gripper_type()),
                         std::vector{uniform(rng, 0.0, 1.0),
                                     uniform(rng, c.gripper_y_lo, c.gripper_y_hi),
                                     -1.0, 0.0});
    for (int i = 0; i < 2; ++i) {
      entries.emplace_back(
          Object::intern("region" + std::to_string(i + 1), region_type()),
          std::vector{block_regions[i].lo, block_regions[i].hi});
      entries.emplace_back(
          Object::intern("region" + std::to_string(i + 3), region_type()),
          std::vector{target_regions[i].lo, target_regions[i].hi});
    }
    Task task;
    task.init = State(std::move(entries));
    task.objects = task.init.objects();
    task.goal = GroundAtomSet{GroundAtom(covers, {blocks[0], targets[perm[0]]}),
                              GroundAtom(covers, {blocks[1], targets[perm[1]]})};
    task.horizon = 1000;
    return task;
  }
  throw Error("cover: could not sample a feasible task");
}

std::vector<double> CoverEnv::parked_block(double x, double width,
                                           double height) const {
  return {height, width, x, 0.0, -1.0};
}

std::optional<Demonstration> CoverEnv::scripted_demo(const Task& task) const {
  const auto& c = config_;
  Rng rng(state_fingerprint(task.init));
  Demonstration demo;
  demo.task = task;
  demo.states.push_back(task.init);

  Object gripper;
  std::vector<Object> regions;
  for (Object o : task.objects) {
    if (o.type() == gripper_type()) gripper = o;
    if (o.type() == region_type()) regions.push_back(o);
  }

  auto act = [&](double tx, double ty, double grip) -> bool {
    // Move to (tx, ty), then grip.
    for (int guard = 0; guard < 200; ++guard) {
      const State& x = demo.states.back();
      double gx = x.get(gripper, kGX), gy = x.get(gripper, kGY);
      double dx = tx - gx, dy = ty - gy;
      bool arrive = std::abs(dx) <= c.max_step + 1e-12 &&
                    std::abs(dy) <= c.max_step + 1e-12;
      Action u{std::clamp(dx, -c.max_step, c.max_step),
               std::clamp(dy, -c.max_step, c.max_step), 0.0};
      demo.actions.push_back(u);
      demo.states.push_back(step(x, u));
      if (arrive) break;
    }
    // Grip on a separate, stationary step.
    demo.actions.push_back({0.0, 0.0, grip});
    demo.states.push_back(step(demo.states.back(), demo.actions.back()));
    return static_cast<int>(demo.actions.size()) <= task.horizon;
  };

  auto region_hull = [&](const State& x, double probe) -> std::optional<Interval> {
    for (Object r : regions) {
      auto f = x[r];
      if (probe >= f[kLower] && probe <= f[kUpper]) return Interval{f[kLower], f[kUpper]};
    }
    return std::nullopt;
  };

  for (const auto& atom : task.goal) {
    if (atom.predicate.name() != "Covers") return std::nullopt;
    Object b = atom.objects[0], t = atom.objects[1];
    const State x0 = demo.states.back();  // copy: act() grows demo.states
    auto bf = x0[b];
    auto tf = x0[t];
    double slack = (bf[kWidth] - tf[kTWidth]) / 2;
    // Grasp offsets inside an allowed region over the block whose placement
    // can still land inside an allowed region over the target.
    std::optional<Interval> grasp;
    std::optional<Interval> place_region;
    for (Object r : regions) {
      auto rf = x0[r];
      Interval over_block =
          Interval{rf[kLower], rf[kUpper]}.intersect(
              {bf[kBX] - bf[kWidth] / 2, bf[kBX] + bf[kWidth] / 2});
      if (over_block.empty(1e-6)) continue;
      for (Object r2 : regions) {
        auto rf2 = x0[r2];
        Interval g{over_block.lo - bf[kBX], over_block.hi - bf[kBX]};
        g = g.intersect({rf2[kLower] - tf[kTX] - slack, rf2[kUpper] - tf[kTX] + slack});
        if (!g.empty(0.02) && (!grasp || g.hi - g.lo > grasp->hi - grasp->lo)) {
          grasp = g;
          place_region = Interval{rf2[kLower], rf2[kUpper]};
        }
      }
    }
    if (!grasp) return std::nullopt;
    Interval gi = grasp->shrink(0.007);
    double offset = uniform(rng, gi.lo, gi.hi);
    if (!act(bf[kBX] + offset, bf[kHeight], c.max_grip_delta)) return std::nullopt;
    if (demo.states.back().get(gripper, kHolding) < 0.5) return std::nullopt;

    double grasp_now = demo.states.back().get(b, kGrasp);
    Interval place = Interval{tf[kTX] + grasp_now - slack, tf[kTX] + grasp_now + slack}
                         .intersect(*place_region)
                         .shrink(0.003);
    if (place.empty()) return std::nullopt;
    double gx_place = uniform(rng, place.lo, place.hi);
    if (!region_hull(demo.states.back(), gx_place)) return std::nullopt;
    if (!act(gx_place, bf[kHeight], -c.max_grip_delta)) return std::nullopt;
    if (demo.states.back().get(gripper, kHolding) > 0.5) return std::nullopt;
  }
  auto s = abstract(demo.states.back());
  if (!goal_holds(task.goal, s)) return std::nullopt;
  return demo;
}

}  // namespace tamp::envs
