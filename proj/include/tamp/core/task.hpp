#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tamp/core/atoms.hpp"
#include "tamp/core/state.hpp"

namespace tamp {

struct Task {
  std::vector<Object> objects;  // canonical order
  State init;
  GroundAtomSet goal;
  int horizon = 1000;
};

struct Demonstration {
  Task task;
  std::vector<Action> actions;
  std::vector<State> states;  // actions.size() + 1 entries
};

/// Every ground atom over `preds` and type-correct object tuples drawn from
/// `objects` whose classifier holds in `x`.
AbstractState abstract(const State& x, std::span<const Predicate> preds,
                       std::span<const Object> objects);
AbstractState abstract(const State& x, std::span<const Predicate> preds);

bool goal_holds(const GroundAtomSet& goal, const AbstractState& s);

/// Calls `fn` with each tuple of objects whose types match `types`
/// positionally. With `distinct`, tuples never repeat an object.
void for_each_typed_tuple(std::span<const ObjectType> types,
                          std::span<const Object> objects, bool distinct,
                          const std::function<void(std::span<const Object>)>& fn);

}  // namespace tamp
