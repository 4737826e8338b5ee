#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tamp/core/state.hpp"
#include "tamp/core/types.hpp"

namespace tamp {

using Classifier =
    std::function<bool(const State&, std::span<const Object>)>;

/// Named relation over typed objects with a state classifier. Equality is by
/// identity of the underlying record; ordering is by name.
class Predicate {
 public:
  Predicate() = default;
  Predicate(std::string name, std::vector<ObjectType> arg_types,
            Classifier classifier, bool is_contact = false);

  const std::string& name() const { return rec_->name; }
  const std::vector<ObjectType>& arg_types() const { return rec_->arg_types; }
  std::size_t arity() const { return rec_->arg_types.size(); }
  bool is_contact() const { return rec_->is_contact; }
  bool holds(const State& x, std::span<const Object> objects) const;
  bool valid() const { return rec_ != nullptr; }

  friend bool operator==(const Predicate& a, const Predicate& b) {
    return a.rec_ == b.rec_;
  }
  friend std::strong_ordering operator<=>(const Predicate& a,
                                          const Predicate& b) {
    return a.name() <=> b.name();
  }

 private:
  struct Record {
    std::string name;
    std::vector<ObjectType> arg_types;
    Classifier classifier;
    bool is_contact;
  };
  std::shared_ptr<const Record> rec_;
};

struct GroundAtom {
  Predicate predicate;
  std::vector<Object> objects;

  GroundAtom() = default;
  GroundAtom(Predicate p, std::vector<Object> objs);

  bool holds(const State& x) const { return predicate.holds(x, objects); }
  bool mentions(Object o) const;

  friend bool operator==(const GroundAtom& a, const GroundAtom& b) {
    return a.predicate == b.predicate && a.objects == b.objects;
  }
  friend std::strong_ordering operator<=>(const GroundAtom& a,
                                          const GroundAtom& b);
};

struct LiftedAtom {
  Predicate predicate;
  std::vector<Variable> variables;

  LiftedAtom() = default;
  LiftedAtom(Predicate p, std::vector<Variable> vars);

  friend bool operator==(const LiftedAtom& a, const LiftedAtom& b) {
    return a.predicate == b.predicate && a.variables == b.variables;
  }
  friend std::strong_ordering operator<=>(const LiftedAtom& a,
                                          const LiftedAtom& b);
};

/// `Pred(obj1,obj2)`
std::string to_string(const GroundAtom& atom);
/// `Pred(?v1,?v2)`
std::string to_string(const LiftedAtom& atom);

/// Canonically ordered set of atoms (sorted, unique).
template <typename Atom>
class AtomSet {
 public:
  AtomSet() = default;
  AtomSet(std::initializer_list<Atom> atoms) : atoms_(atoms) { normalize(); }
  explicit AtomSet(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    normalize();
  }

  bool contains(const Atom& a) const;
  bool insert(const Atom& a);
  bool erase(const Atom& a);
  bool subset_of(const AtomSet& other) const;
  AtomSet minus(const AtomSet& other) const;
  AtomSet united(const AtomSet& other) const;
  AtomSet intersected(const AtomSet& other) const;

  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  auto begin() const { return atoms_.begin(); }
  auto end() const { return atoms_.end(); }
  const std::vector<Atom>& atoms() const { return atoms_; }

  friend bool operator==(const AtomSet& a, const AtomSet& b) = default;
  friend auto operator<=>(const AtomSet& a, const AtomSet& b) {
    return std::lexicographical_compare_three_way(
        a.atoms_.begin(), a.atoms_.end(), b.atoms_.begin(), b.atoms_.end());
  }

 private:
  void normalize();
  std::vector<Atom> atoms_;
};

using GroundAtomSet = AtomSet<GroundAtom>;
using LiftedAtomSet = AtomSet<LiftedAtom>;

/// The set of ground atoms that hold in a state; all absent atoms are false.
using AbstractState = GroundAtomSet;

std::string to_string(const GroundAtomSet& atoms);
std::string to_string(const LiftedAtomSet& atoms);

using Substitution = std::map<Variable, Object>;

/// Grounds each lifted atom positionally. Throws MalformedSubstitution on a
/// missing variable, a type mismatch, or when two atoms collapse into one.
GroundAtomSet apply_substitution(const LiftedAtomSet& atoms,
                                 const Substitution& sub);

/// Inverse direction, used by lifting: every object in an atom must be mapped.
LiftedAtomSet lift_atoms(const GroundAtomSet& atoms,
                         const std::map<Object, Variable>& sub);

/// Splits `Pred(a,b)` into its name and argument names. Throws FormatError.
std::pair<std::string, std::vector<std::string>> split_atom_text(
    std::string_view text);

/// Parses a ground atom, resolving names against `preds` and `objects`.
GroundAtom parse_ground_atom(std::string_view text,
                             std::span<const Predicate> preds,
                             std::span<const Object> objects);

const Predicate* find_predicate(std::span<const Predicate> preds,
                                std::string_view name);

extern template class AtomSet<GroundAtom>;
extern template class AtomSet<LiftedAtom>;

}  // namespace tamp

template <>
struct std::hash<tamp::GroundAtom> {
  std::size_t operator()(const tamp::GroundAtom& a) const noexcept;
};
