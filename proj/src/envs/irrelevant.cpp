#include "tamp/envs/irrelevant.hpp"

#include <map>
#include <mutex>
#include <tuple>

#include "tamp/core/error.hpp"
#include "tamp/envs/cover.hpp"
#include "tamp/util/rng.hpp"

namespace tamp::envs {
namespace {

const CoverEnv& as_cover(const Environment& env) {
  auto* cover = dynamic_cast<const CoverEnv*>(&env);
  if (!cover) throw ContractViolation("irrelevant injection is only defined for cover");
  return *cover;
}

}  // namespace

Task inject_irrelevant_objects(const Environment& env, const Task& task, int n,
                               std::uint64_t seed) {
  const CoverEnv& cover = as_cover(env);
  if (n <= 0) return task;
  const auto& c = cover.config();
  Rng rng(derive_seed({seed, 0x1B10CULL}));
  int existing = 0;
  for (Object o : task.objects) existing += o.type() == cover.block_type();
  std::vector<std::pair<Object, std::vector<double>>> extra;
  for (int i = 0; i < n; ++i) {
    Object b = Object::intern("block" + std::to_string(existing + i + 1),
                              cover.block_type());
    if (task.init.has(b)) throw ContractViolation(b.name() + " already in task");
    double w = uniform(rng, c.block_width_lo, c.block_width_hi);
    double h = uniform(rng, c.block_height_lo, c.block_height_hi);
    // One block-width apart so parked blocks never touch.
    extra.emplace_back(b, cover.parked_block(c.off_table_x + i * 0.5, w, h));
  }
  Task out = task;
  out.init = task.init.with_objects(extra);
  out.objects = out.init.objects();
  return out;
}

std::vector<Predicate> irrelevant_predicates(const Environment& env,
                                             const IrrelevantSpec& spec) {
  const CoverEnv& cover = as_cover(env);
  static std::mutex mu;
  static std::map<std::tuple<int, int, std::uint64_t>, Predicate> cache;
  std::lock_guard lock(mu);

  auto get = [&](int kind, int k, auto make) {
    auto key = std::tuple{kind, k, spec.seed};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, make()).first;
    return it->second;
  };
  std::vector<Predicate> out;
  for (int k = 0; k < spec.n_static_preds; ++k) {
    out.push_back(get(0, k, [&] {
      return Predicate("Static" + std::to_string(k), {cover.block_type()},
                       [](const State&, std::span<const Object>) { return true; });
    }));
  }
  for (int k = 0; k < spec.n_dynamic_preds; ++k) {
    out.push_back(get(1, k, [&] {
      Rng rng(derive_seed({spec.seed, 0xD7ULL, static_cast<std::uint64_t>(k)}));
      double threshold = uniform(rng, 0.1, 0.7);
      return Predicate("GripperAbove" + std::to_string(k), {cover.gripper_type()},
                       [threshold](const State& x, std::span<const Object> o) {
                         return x.get(o[0], CoverEnv::kGY) > threshold;
                       });
    }));
  }
  for (int k = 0; k < spec.n_random_preds; ++k) {
    out.push_back(get(2, k, [&] {
      std::uint64_t salt = derive_seed({spec.seed, 0x5EEDULL, static_cast<std::uint64_t>(k)});
      return Predicate("Random" + std::to_string(k), {cover.gripper_type()},
                       [salt](const State& x, std::span<const Object> o) {
                         std::uint64_t h = salt;
                         for (double v : x[o[0]]) {
                           h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v),
                                                      sizeof v),
                                     h);
                         }
                         return (splitmix64(h) & 1ULL) != 0;
                       });
    }));
  }
  return out;
}

std::pair<Task, std::vector<Predicate>> inject_irrelevant(
    const Environment& env, const Task& task, const IrrelevantSpec& spec) {
  return {inject_irrelevant_objects(env, task, spec.n_objects, spec.seed),
          irrelevant_predicates(env, spec)};
}

}  // namespace tamp::envs
