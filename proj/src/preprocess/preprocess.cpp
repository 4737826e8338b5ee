#include "tamp/preprocess/preprocess.hpp"

#include <algorithm>
#include <set>

#include "tamp/core/error.hpp"

namespace tamp::preprocess {
namespace {

GroundAtomSet contact_atoms(const AbstractState& s) {
  std::vector<GroundAtom> out;
  for (const auto& a : s) {
    if (a.predicate.is_contact()) out.push_back(a);
  }
  return GroundAtomSet(std::move(out));
}

std::vector<Object> objects_of(const GroundAtomSet& a, const GroundAtomSet& b) {
  std::set<Object> objs;
  for (const auto* set : {&a, &b}) {
    for (const auto& atom : *set) objs.insert(atom.objects.begin(), atom.objects.end());
  }
  return {objs.begin(), objs.end()};
}

GroundAtom map_atom(const GroundAtom& atom, const ObjectMap& m) {
  std::vector<Object> objs;
  objs.reserve(atom.objects.size());
  for (Object o : atom.objects) objs.push_back(m.at(o));
  return GroundAtom(atom.predicate, std::move(objs));
}

std::map<std::string, int> predicate_counts(const GroundAtomSet& s) {
  std::map<std::string, int> counts;
  for (const auto& a : s) ++counts[a.predicate.name()];
  return counts;
}

std::vector<AbstractState> abstract_all(const Demonstration& demo,
                                        std::span<const Predicate> preds) {
  std::vector<AbstractState> out;
  out.reserve(demo.states.size());
  for (const auto& x : demo.states) out.push_back(abstract(x, preds));
  return out;
}

// Backtracking search for a map that sends every effect atom of `a` into the
// matching effect set of `b`. Bijectivity plus equal set sizes make the
// images equal.
class MapSearch {
 public:
  MapSearch(const Segment& a, const Segment& b) : a_(a), b_(b) {}

  std::optional<ObjectMap> run() {
    if (a_.affected.size() != b_.affected.size()) return std::nullopt;
    if (a_.add_effects.size() != b_.add_effects.size() ||
        a_.delete_effects.size() != b_.delete_effects.size()) {
      return std::nullopt;
    }
    if (predicate_counts(a_.add_effects) != predicate_counts(b_.add_effects) ||
        predicate_counts(a_.delete_effects) != predicate_counts(b_.delete_effects)) {
      return std::nullopt;
    }
    used_.assign(b_.affected.size(), false);
    if (extend(0)) return map_;
    return std::nullopt;
  }

 private:
  bool consistent(const GroundAtomSet& from, const GroundAtomSet& to) const {
    for (const auto& atom : from) {
      bool complete = std::all_of(atom.objects.begin(), atom.objects.end(),
                                  [&](Object o) { return map_.count(o) > 0; });
      if (complete && !to.contains(map_atom(atom, map_))) return false;
    }
    return true;
  }

  bool extend(std::size_t i) {
    if (i == a_.affected.size()) return true;
    Object src = a_.affected[i];
    for (std::size_t j = 0; j < b_.affected.size(); ++j) {
      Object dst = b_.affected[j];
      if (used_[j] || dst.type() != src.type()) continue;
      map_[src] = dst;
      used_[j] = true;
      if (consistent(a_.add_effects, b_.add_effects) &&
          consistent(a_.delete_effects, b_.delete_effects) && extend(i + 1)) {
        return true;
      }
      used_[j] = false;
      map_.erase(src);
    }
    return false;
  }

  const Segment& a_;
  const Segment& b_;
  ObjectMap map_;
  std::vector<bool> used_;
};

bool earlier(const Segment& a, const Segment& b) {
  return std::tie(a.demo_index, a.start) < std::tie(b.demo_index, b.start);
}

}  // namespace

LiftedAtomSet LiftedSkillDataset::add_effects() const {
  return lift_atoms(dataset.rep().add_effects,
                    object_maps[dataset.representative]);
}

LiftedAtomSet LiftedSkillDataset::delete_effects() const {
  return lift_atoms(dataset.rep().delete_effects,
                    object_maps[dataset.representative]);
}

Segment make_segment(const Demonstration& demo, std::span<const Predicate>,
                     std::span<const AbstractState> abstract_states,
                     std::size_t begin, std::size_t end, std::size_t demo_index) {
  if (end <= begin || end >= demo.states.size()) {
    throw ContractViolation("segment bounds out of range");
  }
  Segment seg;
  seg.actions.assign(demo.actions.begin() + begin, demo.actions.begin() + end);
  seg.states.assign(demo.states.begin() + begin, demo.states.begin() + end + 1);
  seg.init_abstract = abstract_states[begin];
  seg.final_abstract = abstract_states[end];
  seg.add_effects = seg.final_abstract.minus(seg.init_abstract);
  seg.delete_effects = seg.init_abstract.minus(seg.final_abstract);
  seg.affected = objects_of(seg.add_effects, seg.delete_effects);
  seg.demo_index = demo_index;
  seg.start = begin;
  return seg;
}

std::vector<Segment> segment(const Demonstration& demo,
                             std::span<const Predicate> preds,
                             std::size_t demo_index) {
  std::vector<Segment> out;
  if (demo.actions.empty()) return out;
  auto abs = abstract_all(demo, preds);
  std::size_t begin = 0;
  GroundAtomSet prev = contact_atoms(abs[0]);
  for (std::size_t i = 1; i < abs.size(); ++i) {
    GroundAtomSet cur = contact_atoms(abs[i]);
    bool last = i + 1 == abs.size();
    if (!(cur == prev) || last) {
      out.push_back(make_segment(demo, preds, abs, begin, i, demo_index));
      begin = i;
    }
    prev = std::move(cur);
  }
  return out;
}

std::vector<Segment> segment_single_steps(const Demonstration& demo,
                                          std::span<const Predicate> preds,
                                          std::size_t demo_index) {
  std::vector<Segment> out;
  auto abs = abstract_all(demo, preds);
  for (std::size_t i = 0; i < demo.actions.size(); ++i) {
    out.push_back(make_segment(demo, preds, abs, i, i + 1, demo_index));
  }
  return out;
}

std::vector<Segment> segment_all(std::span<const Demonstration> demos,
                                 std::span<const Predicate> preds,
                                 bool single_steps, bool keep_empty) {
  std::vector<std::vector<Segment>> per_demo(demos.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t d = 0; d < demos.size(); ++d) {
    per_demo[d] = single_steps ? segment_single_steps(demos[d], preds, d)
                               : segment(demos[d], preds, d);
  }
  std::vector<Segment> out;
  for (auto& segs : per_demo) {
    for (auto& s : segs) {
      if (keep_empty || !s.add_effects.empty() || !s.delete_effects.empty()) {
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

std::optional<ObjectMap> equivalent(const Segment& a, const Segment& b) {
  return MapSearch(a, b).run();
}

std::vector<SkillDataset> partition(std::vector<Segment> segments) {
  // Equivalence is transitive, so comparing against one member per class is
  // enough; comparing against the earliest keeps results order-independent.
  std::sort(segments.begin(), segments.end(), earlier);
  std::vector<SkillDataset> out;
  for (auto& seg : segments) {
    bool placed = false;
    for (auto& ds : out) {
      if (equivalent(seg, ds.rep())) {
        ds.segments.push_back(std::move(seg));
        placed = true;
        break;
      }
    }
    if (!placed) {
      SkillDataset ds;
      ds.segments.push_back(std::move(seg));
      out.push_back(std::move(ds));
    }
  }
  auto key = [](const SkillDataset& ds) {
    return to_string(ds.rep().add_effects) + " / " + to_string(ds.rep().delete_effects);
  };
  std::stable_sort(out.begin(), out.end(), [&](const SkillDataset& a, const SkillDataset& b) {
    if (a.segments.size() != b.segments.size()) return a.segments.size() > b.segments.size();
    return key(a) < key(b);
  });
  return out;
}

LiftedSkillDataset lift(SkillDataset ds) {
  if (ds.segments.empty()) throw ContractViolation("cannot lift an empty dataset");
  const Segment& rep = ds.rep();
  // First appearance in the canonical effect atom order.
  std::vector<Object> appearance;
  for (const auto& atom : rep.add_effects.united(rep.delete_effects)) {
    for (Object o : atom.objects) {
      if (std::find(appearance.begin(), appearance.end(), o) == appearance.end()) {
        appearance.push_back(o);
      }
    }
  }
  std::vector<Object> order = appearance;
  std::stable_sort(order.begin(), order.end(), [](Object a, Object b) {
    return a.type().name() < b.type().name();
  });
  LiftedSkillDataset out;
  std::map<Object, Variable> rep_map;
  std::map<std::string, int> per_type;
  for (Object o : order) {
    const std::string& t = o.type().name();
    Variable v = Variable::intern("?" + t + std::to_string(per_type[t]++), o.type());
    out.variables.push_back(v);
    rep_map[o] = v;
  }
  for (std::size_t i = 0; i < ds.segments.size(); ++i) {
    if (i == ds.representative) {
      out.object_maps.push_back(rep_map);
      continue;
    }
    auto delta = equivalent(ds.segments[i], rep);
    if (!delta) {
      throw Error("internal: segment not equivalent to its dataset representative");
    }
    std::map<Object, Variable> m;
    for (auto [from, to] : *delta) m[from] = rep_map.at(to);
    out.object_maps.push_back(std::move(m));
  }
  out.dataset = std::move(ds);
  return out;
}

std::vector<LiftedSkillDataset> preprocess(std::span<const Demonstration> demos,
                                           std::span<const Predicate> preds,
                                           bool single_steps) {
  auto segs = segment_all(demos, preds, single_steps, single_steps);
  std::vector<LiftedSkillDataset> out;
  for (auto& ds : partition(std::move(segs))) out.push_back(lift(std::move(ds)));
  return out;
}

}  // namespace tamp::preprocess
