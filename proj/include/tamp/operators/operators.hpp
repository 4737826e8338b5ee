#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tamp/core/atoms.hpp"
#include "tamp/preprocess/preprocess.hpp"

namespace tamp::operators {

struct Operator {
  std::string name;
  std::vector<Variable> arguments;
  LiftedAtomSet preconditions;
  LiftedAtomSet add_effects;
  LiftedAtomSet delete_effects;

  friend bool operator==(const Operator&, const Operator&) = default;
};

/// Operator bound to objects. `op` must outlive the grounding.
struct GroundOperator {
  const Operator* op = nullptr;
  std::vector<Object> objects;
  GroundAtomSet preconditions;
  GroundAtomSet add_effects;
  GroundAtomSet delete_effects;

  Substitution substitution() const;
  std::string to_string() const;  // name(obj1,obj2)
};

/// Arguments are the dataset variables, effects the lifted representative
/// effects, preconditions the intersection of lifted initial atoms (atoms
/// over objects outside the skill scope are dropped first).
Operator learn_operator(const preprocess::LiftedSkillDataset& lds, std::string name);

/// Keeps datasets with at least `fraction` of all segments (strict `<` drops).
std::vector<preprocess::LiftedSkillDataset> filter_low_data(
    std::vector<preprocess::LiftedSkillDataset> datasets, bool enabled,
    double fraction = 0.01);

/// One grounding per duplicate-free, type-correct object tuple.
std::vector<GroundOperator> ground(const Operator& op, std::span<const Object> objects);
GroundOperator ground_one(const Operator& op, std::vector<Object> objects);

bool applicable(const AbstractState& s, const GroundOperator& g);

/// (s \ E-) u E+. Throws InapplicableOperator if the preconditions fail.
AbstractState abstract_transition(const AbstractState& s, const GroundOperator& g);

std::string render_operator(const Operator& op);

/// Inverse of render_operator; throws FormatError.
Operator parse_operator(std::string_view text, std::span<const Predicate> preds,
                        std::span<const ObjectType> types);

}  // namespace tamp::operators
