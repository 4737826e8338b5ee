#include "tamp/operators/operators.hpp"

#include <algorithm>
#include <sstream>

#include "tamp/core/error.hpp"

namespace tamp::operators {

using preprocess::LiftedSkillDataset;

Substitution GroundOperator::substitution() const {
  Substitution sub;
  for (std::size_t i = 0; i < objects.size(); ++i) sub[op->arguments[i]] = objects[i];
  return sub;
}

std::string GroundOperator::to_string() const {
  std::string out = op->name + "(";
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (i) out += ",";
    out += objects[i].name();
  }
  return out + ")";
}

Operator learn_operator(const LiftedSkillDataset& lds, std::string name) {
  Operator op;
  op.name = std::move(name);
  op.arguments = lds.variables;
  op.add_effects = lds.add_effects();
  op.delete_effects = lds.delete_effects();
  bool first = true;
  for (std::size_t i = 0; i < lds.dataset.segments.size(); ++i) {
    const auto& map = lds.object_maps[i];
    std::vector<GroundAtom> scoped;
    for (const auto& atom : lds.dataset.segments[i].init_abstract) {
      bool inside = std::all_of(atom.objects.begin(), atom.objects.end(),
                                [&](Object o) { return map.count(o) > 0; });
      if (inside) scoped.push_back(atom);
    }
    LiftedAtomSet lifted = lift_atoms(GroundAtomSet(std::move(scoped)), map);
    op.preconditions = first ? lifted : op.preconditions.intersected(lifted);
    first = false;
  }
  return op;
}

std::vector<LiftedSkillDataset> filter_low_data(std::vector<LiftedSkillDataset> datasets,
                                                bool enabled, double fraction) {
  if (!enabled) return datasets;
  std::size_t total = 0;
  for (const auto& d : datasets) total += d.dataset.segments.size();
  std::vector<LiftedSkillDataset> out;
  for (auto& d : datasets) {
    if (static_cast<double>(d.dataset.segments.size()) >= fraction * total) {
      out.push_back(std::move(d));
    }
  }
  return out;
}

GroundOperator ground_one(const Operator& op, std::vector<Object> objects) {
  GroundOperator g;
  g.op = &op;
  g.objects = std::move(objects);
  Substitution sub = g.substitution();
  g.preconditions = apply_substitution(op.preconditions, sub);
  g.add_effects = apply_substitution(op.add_effects, sub);
  g.delete_effects = apply_substitution(op.delete_effects, sub);
  return g;
}

std::vector<GroundOperator> ground(const Operator& op, std::span<const Object> objects) {
  std::vector<ObjectType> types;
  for (Variable v : op.arguments) types.push_back(v.type());
  std::vector<GroundOperator> out;
  for_each_typed_tuple(types, objects, true, [&](std::span<const Object> tuple) {
    out.push_back(ground_one(op, std::vector<Object>(tuple.begin(), tuple.end())));
  });
  return out;
}

bool applicable(const AbstractState& s, const GroundOperator& g) {
  return g.preconditions.subset_of(s);
}

AbstractState abstract_transition(const AbstractState& s, const GroundOperator& g) {
  if (!applicable(s, g)) {
    throw InapplicableOperator(g.to_string() + " is not applicable");
  }
  return s.minus(g.delete_effects).united(g.add_effects);
}

namespace {

std::string join_atoms(const LiftedAtomSet& atoms) {
  std::string out;
  for (const auto& a : atoms) {
    if (!out.empty()) out += ", ";
    out += to_string(a);
  }
  return out;
}

// Splits on commas that are not inside parentheses.
std::vector<std::string> split_top_level(std::string_view text) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  std::vector<std::string> trimmed;
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    auto e = s.find_last_not_of(" \t");
    trimmed.push_back(s.substr(b, e - b + 1));
  }
  return trimmed;
}

std::string field(const std::string& line, std::string_view label) {
  auto pos = line.find_first_not_of(' ');
  if (pos == std::string::npos || line.compare(pos, label.size(), label) != 0) {
    throw FormatError("expected '" + std::string(label) + "' in operator text");
  }
  return line.substr(pos + label.size());
}

}  // namespace

std::string render_operator(const Operator& op) {
  std::string args;
  for (Variable v : op.arguments) {
    if (!args.empty()) args += ", ";
    args += v.name() + ":" + v.type().name();
  }
  std::ostringstream out;
  out << "Operator " << op.name << "\n"
      << "    Arguments: " << args << "\n"
      << "    Preconditions: " << join_atoms(op.preconditions) << "\n"
      << "    Add Effects: " << join_atoms(op.add_effects) << "\n"
      << "    Delete Effects: " << join_atoms(op.delete_effects) << "\n";
  return out.str();
}

Operator parse_operator(std::string_view text, std::span<const Predicate> preds,
                        std::span<const ObjectType> types) {
  std::istringstream in{std::string(text)};
  std::string lines[5];
  for (auto& l : lines) {
    if (!std::getline(in, l)) throw FormatError("truncated operator text");
  }
  Operator op;
  op.name = field(lines[0], "Operator ");
  for (const auto& arg : split_top_level(field(lines[1], "Arguments:"))) {
    auto colon = arg.find(':');
    if (colon == std::string::npos) throw FormatError("argument without type: " + arg);
    std::string tname = arg.substr(colon + 1);
    auto t = std::find_if(types.begin(), types.end(),
                          [&](const ObjectType& ty) { return ty.name() == tname; });
    if (t == types.end()) throw FormatError("unknown type '" + tname + "'");
    op.arguments.push_back(Variable::intern(arg.substr(0, colon), *t));
  }
  auto atoms = [&](const std::string& body) {
    std::vector<LiftedAtom> out;
    for (const auto& a : split_top_level(body)) {
      auto [name, args] = split_atom_text(a);
      const Predicate* p = find_predicate(preds, name);
      if (!p) throw FormatError("unknown predicate '" + name + "'");
      std::vector<Variable> vars;
      for (const auto& v : args) {
        auto it = std::find_if(op.arguments.begin(), op.arguments.end(),
                               [&](Variable x) { return x.name() == v; });
        if (it == op.arguments.end()) throw FormatError("unbound variable " + v);
        vars.push_back(*it);
      }
      try {
        out.emplace_back(*p, std::move(vars));
      } catch (const ContractViolation& e) {
        throw FormatError(e.what());
      }
    }
    return LiftedAtomSet(std::move(out));
  };
  op.preconditions = atoms(field(lines[2], "Preconditions:"));
  op.add_effects = atoms(field(lines[3], "Add Effects:"));
  op.delete_effects = atoms(field(lines[4], "Delete Effects:"));
  return op;
}

}  // namespace tamp::operators
