#include "tamp/core/atoms.hpp"

#include <algorithm>
#include <cctype>

#include "tamp/core/error.hpp"

namespace tamp {

Predicate::Predicate(std::string name, std::vector<ObjectType> arg_types,
                     Classifier classifier, bool is_contact)
    : rec_(std::make_shared<const Record>(Record{std::move(name),
                                                 std::move(arg_types),
                                                 std::move(classifier),
                                                 is_contact})) {}

bool Predicate::holds(const State& x, std::span<const Object> objects) const {
  if (objects.size() != arity()) {
    throw ContractViolation(name() + " expects " + std::to_string(arity()) +
                            " objects, got " + std::to_string(objects.size()));
  }
  return rec_->classifier(x, objects);
}

GroundAtom::GroundAtom(Predicate p, std::vector<Object> objs)
    : predicate(std::move(p)), objects(std::move(objs)) {
  const auto& types = predicate.arg_types();
  if (objects.size() != types.size()) {
    throw ContractViolation("arity mismatch for " + predicate.name());
  }
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (objects[i].type() != types[i]) {
      throw ContractViolation("type mismatch for " + predicate.name() +
                              " argument " + std::to_string(i) + ": '" +
                              objects[i].name() + "'");
    }
  }
}

bool GroundAtom::mentions(Object o) const {
  return std::find(objects.begin(), objects.end(), o) != objects.end();
}

std::strong_ordering operator<=>(const GroundAtom& a, const GroundAtom& b) {
  if (auto c = a.predicate <=> b.predicate; c != 0) return c;
  return std::lexicographical_compare_three_way(
      a.objects.begin(), a.objects.end(), b.objects.begin(), b.objects.end());
}

LiftedAtom::LiftedAtom(Predicate p, std::vector<Variable> vars)
    : predicate(std::move(p)), variables(std::move(vars)) {
  const auto& types = predicate.arg_types();
  if (variables.size() != types.size()) {
    throw ContractViolation("arity mismatch for " + predicate.name());
  }
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (variables[i].type() != types[i]) {
      throw ContractViolation("type mismatch for " + predicate.name() +
                              " argument " + std::to_string(i) + ": '" +
                              variables[i].name() + "'");
    }
  }
}

std::strong_ordering operator<=>(const LiftedAtom& a, const LiftedAtom& b) {
  if (auto c = a.predicate <=> b.predicate; c != 0) return c;
  return std::lexicographical_compare_three_way(
      a.variables.begin(), a.variables.end(), b.variables.begin(),
      b.variables.end());
}

namespace {
template <typename Terms>
std::string render(const std::string& pred, const Terms& terms) {
  std::string out = pred + "(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += ",";
    out += terms[i].name();
  }
  return out + ")";
}

template <typename Set>
std::string render_set(const Set& set) {
  std::string out = "{";
  bool first = true;
  for (const auto& a : set) {
    if (!first) out += ", ";
    out += to_string(a);
    first = false;
  }
  return out + "}";
}
}  // namespace

std::string to_string(const GroundAtom& atom) {
  return render(atom.predicate.name(), atom.objects);
}
std::string to_string(const LiftedAtom& atom) {
  return render(atom.predicate.name(), atom.variables);
}
std::string to_string(const GroundAtomSet& atoms) { return render_set(atoms); }
std::string to_string(const LiftedAtomSet& atoms) { return render_set(atoms); }

template <typename Atom>
void AtomSet<Atom>::normalize() {
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

template <typename Atom>
bool AtomSet<Atom>::contains(const Atom& a) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), a);
}

template <typename Atom>
bool AtomSet<Atom>::insert(const Atom& a) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
  if (it != atoms_.end() && *it == a) return false;
  atoms_.insert(it, a);
  return true;
}

template <typename Atom>
bool AtomSet<Atom>::erase(const Atom& a) {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), a);
  if (it == atoms_.end() || !(*it == a)) return false;
  atoms_.erase(it);
  return true;
}

template <typename Atom>
bool AtomSet<Atom>::subset_of(const AtomSet& other) const {
  return std::includes(other.atoms_.begin(), other.atoms_.end(),
                       atoms_.begin(), atoms_.end());
}

template <typename Atom>
AtomSet<Atom> AtomSet<Atom>::minus(const AtomSet& other) const {
  AtomSet out;
  std::set_difference(atoms_.begin(), atoms_.end(), other.atoms_.begin(),
                      other.atoms_.end(), std::back_inserter(out.atoms_));
  return out;
}

template <typename Atom>
AtomSet<Atom> AtomSet<Atom>::united(const AtomSet& other) const {
  AtomSet out;
  std::set_union(atoms_.begin(), atoms_.end(), other.atoms_.begin(),
                 other.atoms_.end(), std::back_inserter(out.atoms_));
  return out;
}

template <typename Atom>
AtomSet<Atom> AtomSet<Atom>::intersected(const AtomSet& other) const {
  AtomSet out;
  std::set_intersection(atoms_.begin(), atoms_.end(), other.atoms_.begin(),
                        other.atoms_.end(), std::back_inserter(out.atoms_));
  return out;
}

template class AtomSet<GroundAtom>;
template class AtomSet<LiftedAtom>;

GroundAtomSet apply_substitution(const LiftedAtomSet& atoms,
                                 const Substitution& sub) {
  std::vector<GroundAtom> out;
  out.reserve(atoms.size());
  for (const auto& atom : atoms) {
    std::vector<Object> objs;
    objs.reserve(atom.variables.size());
    for (Variable v : atom.variables) {
      auto it = sub.find(v);
      if (it == sub.end()) {
        throw MalformedSubstitution("no object for variable " + v.name());
      }
      if (it->second.type() != v.type()) {
        throw MalformedSubstitution("object '" + it->second.name() +
                                    "' does not have the type of " + v.name());
      }
      objs.push_back(it->second);
    }
    out.emplace_back(atom.predicate, std::move(objs));
  }
  GroundAtomSet result(std::move(out));
  if (result.size() != atoms.size()) {
    throw MalformedSubstitution("substitution is not injective");
  }
  return result;
}

LiftedAtomSet lift_atoms(const GroundAtomSet& atoms,
                         const std::map<Object, Variable>& sub) {
  std::vector<LiftedAtom> out;
  out.reserve(atoms.size());
  for (const auto& atom : atoms) {
    std::vector<Variable> vars;
    for (Object o : atom.objects) {
      auto it = sub.find(o);
      if (it == sub.end()) {
        throw MalformedSubstitution("no variable for object " + o.name());
      }
      vars.push_back(it->second);
    }
    out.emplace_back(atom.predicate, std::move(vars));
  }
  return LiftedAtomSet(std::move(out));
}

std::pair<std::string, std::vector<std::string>> split_atom_text(
    std::string_view text) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
    return v;
  };
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || open == 0 || text.back() != ')') {
    throw FormatError("malformed atom '" + std::string(text) + "'");
  }
  std::string name(trim(text.substr(0, open)));
  std::vector<std::string> args;
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  if (!trim(inner).empty()) {
    std::size_t start = 0;
    while (true) {
      auto comma = inner.find(',', start);
      auto piece = trim(inner.substr(start, comma == std::string_view::npos
                                                ? std::string_view::npos
                                                : comma - start));
      if (piece.empty()) {
        throw FormatError("empty argument in atom '" + std::string(text) + "'");
      }
      args.emplace_back(piece);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return {std::move(name), std::move(args)};
}

const Predicate* find_predicate(std::span<const Predicate> preds,
                                std::string_view name) {
  for (const auto& p : preds) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

GroundAtom parse_ground_atom(std::string_view text,
                             std::span<const Predicate> preds,
                             std::span<const Object> objects) {
  auto [name, args] = split_atom_text(text);
  const Predicate* pred = find_predicate(preds, name);
  if (!pred) throw FormatError("unknown predicate '" + name + "'");
  std::vector<Object> objs;
  for (const auto& a : args) {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](Object o) { return o.name() == a; });
    if (it == objects.end()) throw FormatError("unknown object '" + a + "'");
    objs.push_back(*it);
  }
  try {
    return GroundAtom(*pred, std::move(objs));
  } catch (const ContractViolation& e) {
    throw FormatError(e.what());
  }
}

}  // namespace tamp

std::size_t std::hash<tamp::GroundAtom>::operator()(
    const tamp::GroundAtom& a) const noexcept {
  std::size_t h = std::hash<std::string>{}(a.predicate.name());
  for (auto o : a.objects) {
    h ^= std::hash<tamp::Object>{}(o) + 0x9e3779b97f4a7c15ULL + (h << 6) +
         (h >> 2);
  }
  return h;
}
