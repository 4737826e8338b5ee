#include "tamp/core/task.hpp"

namespace tamp {

void for_each_typed_tuple(
    std::span<const ObjectType> types, std::span<const Object> objects,
    bool distinct, const std::function<void(std::span<const Object>)>& fn) {
  std::vector<std::vector<Object>> candidates(types.size());
  for (std::size_t i = 0; i < types.size(); ++i) {
    for (Object o : objects) {
      if (o.type() == types[i]) candidates[i].push_back(o);
    }
    if (candidates[i].empty()) return;
  }
  std::vector<Object> tuple(types.size());
  std::vector<std::size_t> idx(types.size(), 0);
  // Odometer enumeration in canonical order.
  while (true) {
    bool ok = true;
    for (std::size_t i = 0; i < types.size() && ok; ++i) {
      tuple[i] = candidates[i][idx[i]];
      if (distinct) {
        for (std::size_t j = 0; j < i; ++j) {
          if (tuple[j] == tuple[i]) {
            ok = false;
            break;
          }
        }
      }
    }
    if (ok) fn(tuple);
    std::size_t pos = types.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < candidates[pos].size()) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    if (types.empty()) return;
  }
}

AbstractState abstract(const State& x, std::span<const Predicate> preds,
                       std::span<const Object> objects) {
  std::vector<GroundAtom> atoms;
  for (const auto& pred : preds) {
    for_each_typed_tuple(pred.arg_types(), objects, false,
                         [&](std::span<const Object> tuple) {
                           if (pred.holds(x, tuple)) {
                             atoms.emplace_back(
                                 pred, std::vector<Object>(tuple.begin(),
                                                           tuple.end()));
                           }
                         });
  }
  return AbstractState(std::move(atoms));
}

AbstractState abstract(const State& x, std::span<const Predicate> preds) {
  return abstract(x, preds, x.objects());
}

bool goal_holds(const GroundAtomSet& goal, const AbstractState& s) {
  return goal.subset_of(s);
}

}  // namespace tamp
