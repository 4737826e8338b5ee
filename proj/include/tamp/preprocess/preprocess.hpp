#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tamp/core/task.hpp"

namespace tamp::preprocess {

/// Contiguous slice of a demonstration. Consecutive segments share their
/// boundary state; effects compare the first and last state of the slice.
struct Segment {
  std::vector<Action> actions;
  std::vector<State> states;  // actions.size() + 1
  AbstractState init_abstract;
  AbstractState final_abstract;
  GroundAtomSet add_effects;
  GroundAtomSet delete_effects;
  std::vector<Object> affected;  // canonical order
  // Where the slice came from, for stable ordering and debugging.
  std::size_t demo_index = 0;
  std::size_t start = 0;
};

using ObjectMap = std::map<Object, Object>;

struct SkillDataset {
  std::vector<Segment> segments;
  std::size_t representative = 0;  // index into segments

  const Segment& rep() const { return segments[representative]; }
};

struct LiftedSkillDataset {
  SkillDataset dataset;
  std::vector<Variable> variables;
  std::vector<std::map<Object, Variable>> object_maps;  // per segment

  LiftedAtomSet add_effects() const;
  LiftedAtomSet delete_effects() const;
};

/// Builds a segment from states[begin..end] of a demonstration.
Segment make_segment(const Demonstration& demo, std::span<const Predicate> preds,
                     std::span<const AbstractState> abstract_states,
                     std::size_t begin, std::size_t end, std::size_t demo_index);

/// Splits wherever a contact-flagged atom changes between consecutive states.
std::vector<Segment> segment(const Demonstration& demo,
                             std::span<const Predicate> preds,
                             std::size_t demo_index = 0);

/// One segment per transition (pass-through ablation).
std::vector<Segment> segment_single_steps(const Demonstration& demo,
                                          std::span<const Predicate> preds,
                                          std::size_t demo_index = 0);

/// Segments every demonstration, dropping empty-effect segments unless
/// `keep_empty`.
std::vector<Segment> segment_all(std::span<const Demonstration> demos,
                                 std::span<const Predicate> preds,
                                 bool single_steps = false,
                                 bool keep_empty = false);

/// Injective, type-preserving map from a's affected objects onto b's that
/// carries a's effects exactly onto b's. The lexicographically smallest map
/// (canonical object order) is returned when several exist.
std::optional<ObjectMap> equivalent(const Segment& a, const Segment& b);

/// Groups segments into equivalence classes. Datasets are ordered by size
/// (largest first), ties by rendered effects; the representative is the
/// member that comes first in (demo_index, start) order.
std::vector<SkillDataset> partition(std::vector<Segment> segments);

/// Canonical variable order: the representative's affected objects sorted by
/// type name, then by first appearance in the sorted effect atoms. Names are
/// ?<type><k>.
LiftedSkillDataset lift(SkillDataset ds);

std::vector<LiftedSkillDataset> preprocess(std::span<const Demonstration> demos,
                                           std::span<const Predicate> preds,
                                           bool single_steps = false);

}  // namespace tamp::preprocess
