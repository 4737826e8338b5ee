#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "tamp/envs/environment.hpp"
#include "tamp/preprocess/preprocess.hpp"

namespace tamp::testing {

/// Demonstrations cached per (env, n, seed) so suites share corpora.
const std::vector<Demonstration>& corpus(const std::string& env, std::size_t n,
                                         std::uint64_t seed);

/// Exhaustive search over every injective type-preserving map between the
/// affected sets, in lexicographic order; returns the first that carries the
/// effects exactly.
inline std::optional<preprocess::ObjectMap> brute_force_map(
    const preprocess::Segment& a, const preprocess::Segment& b) {
  if (a.affected.size() != b.affected.size()) return std::nullopt;
  std::vector<std::size_t> perm(b.affected.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  do {
    preprocess::ObjectMap m;
    bool typed = true;
    for (std::size_t i = 0; i < perm.size() && typed; ++i) {
      typed = a.affected[i].type() == b.affected[perm[i]].type();
      m[a.affected[i]] = b.affected[perm[i]];
    }
    if (!typed) continue;
    auto image = [&](const GroundAtomSet& s) {
      std::vector<GroundAtom> out;
      for (const auto& atom : s) {
        std::vector<Object> objs;
        for (Object o : atom.objects) objs.push_back(m.at(o));
        out.emplace_back(atom.predicate, objs);
      }
      return GroundAtomSet(out);
    };
    if (image(a.add_effects) == b.add_effects &&
        image(a.delete_effects) == b.delete_effects) {
      return m;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

}  // namespace tamp::testing
