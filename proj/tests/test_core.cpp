#include <doctest.h>

#include "tamp/core/error.hpp"
#include "tamp/core/task.hpp"
#include "tamp/envs/cover.hpp"
#include "tamp/envs/stick_button.hpp"

using namespace tamp;

namespace {

const envs::CoverEnv& cover() {
  return dynamic_cast<const envs::CoverEnv&>(envs::get_environment("cover"));
}

// Gripper at x=0.9 far from both blocks, nothing held.
State far_gripper_state() {
  const auto& env = cover();
  return State({
      {Object::intern("block1", env.block_type()), {0.1, 0.12, 0.2, 0.0, -1.0}},
      {Object::intern("block2", env.block_type()), {0.08, 0.14, 0.5, 0.0, -1.0}},
      {Object::intern("target1", env.target_type()), {0.05, 0.7}},
      {Object::intern("gripper", env.gripper_type()), {0.9, 0.4, -1.0, 0.0}},
  });
}

}  // namespace

TEST_CASE("abstract on a Cover state with an idle gripper") {
  const auto& env = cover();
  State x = far_gripper_state();
  AbstractState s = env.abstract(x);
  Object g = Object::intern("gripper", env.gripper_type());
  Object b1 = Object::intern("block1", env.block_type());
  // Classifiers evaluated by hand: holding=0 -> HandEmpty; blocks rest away
  // from the target -> no Covers; unary type tags always hold.
  GroundAtomSet expected{
      GroundAtom(env.predicate("HandEmpty"), {g}),
      GroundAtom(env.predicate("IsBlock"), {b1}),
      GroundAtom(env.predicate("IsBlock"), {Object::intern("block2", env.block_type())}),
      GroundAtom(env.predicate("IsTarget"), {Object::intern("target1", env.target_type())}),
  };
  CHECK(s == expected);
  CHECK(to_string(s) ==
        "{HandEmpty(gripper), IsBlock(block1), IsBlock(block2), IsTarget(target1)}");
  CHECK(abstract(x, {}) == AbstractState{});
  CHECK(env.abstract(x) == s);  // pure
}

TEST_CASE("abstract on a Stick Button state with the stick held") {
  const auto& env =
      dynamic_cast<const envs::StickButtonEnv&>(envs::get_environment("stick_button"));
  Object r = Object::intern("robot", env.robot_type());
  Object st = Object::intern("stick", env.stick_type());
  State x({
      {r, {0.3, 0.3}},
      {st, {0.3, 0.1, 1.0}},
      {Object::intern("holder", env.holder_type()), {0.8, 0.1}},
      {Object::intern("button1", env.button_type()), {0.6, 0.2, 0.0}},
  });
  AbstractState s = env.abstract(x);
  CHECK(s.contains(GroundAtom(env.predicate("Grasped"), {r, st})));
  CHECK_FALSE(s.contains(GroundAtom(env.predicate("HandEmpty"), {r})));
  CHECK(s.contains(GroundAtom(env.predicate("AboveNoButton"), {r})));
}

TEST_CASE("goal_holds is a subset test") {
  const auto& env = cover();
  State x = far_gripper_state();
  AbstractState s = env.abstract(x);
  CHECK(goal_holds({}, s));
  Object b1 = Object::intern("block1", env.block_type());
  Object t1 = Object::intern("target1", env.target_type());
  CHECK_FALSE(goal_holds({GroundAtom(env.predicate("Covers"), {b1, t1})}, s));
}

TEST_CASE("apply_substitution grounds positionally and rejects bad maps") {
  const auto& env = cover();
  Variable g = Variable::intern("?g", env.gripper_type());
  Variable b = Variable::intern("?b", env.block_type());
  Object gripper = Object::intern("gripper", env.gripper_type());
  Object b1 = Object::intern("block1", env.block_type());
  Object b2 = Object::intern("block2", env.block_type());
  const Predicate& holding = env.predicate("Holding");

  LiftedAtomSet lifted{LiftedAtom(holding, {g, b})};
  auto ground = apply_substitution(lifted, {{g, gripper}, {b, b1}});
  CHECK(to_string(ground) == "{Holding(gripper,block1)}");
  CHECK(apply_substitution({}, {{g, gripper}}).empty());

  CHECK_THROWS_AS(apply_substitution(lifted, {{g, gripper}}), MalformedSubstitution);
  CHECK_THROWS_AS(apply_substitution(lifted, {{g, gripper}, {b, gripper}}),
                  MalformedSubstitution);

  // Two variables collapsing onto one object merge two atoms.
  Variable b_other = Variable::intern("?b_other", env.block_type());
  LiftedAtomSet two{LiftedAtom(env.predicate("IsBlock"), {b}),
                    LiftedAtom(env.predicate("IsBlock"), {b_other})};
  CHECK_THROWS_AS(apply_substitution(two, {{b, b1}, {b_other, b1}}),
                  MalformedSubstitution);

  // Inverse mapping recovers the lifted set.
  auto grounded = apply_substitution(two, {{b, b1}, {b_other, b2}});
  CHECK(lift_atoms(grounded, {{b1, b}, {b2, b_other}}) == two);
}

TEST_CASE("atom text parses back") {
  const auto& env = cover();
  State x = far_gripper_state();
  for (const auto& atom : env.abstract(x)) {
    CHECK(parse_ground_atom(to_string(atom), env.predicates(), x.objects()) == atom);
  }
  CHECK_THROWS_AS(parse_ground_atom("Holding(gripper", env.predicates(), x.objects()),
                  FormatError);
  CHECK_THROWS_AS(parse_ground_atom("Nope(gripper)", env.predicates(), x.objects()),
                  FormatError);
  CHECK_THROWS_AS(parse_ground_atom("HandEmpty(block1)", env.predicates(), x.objects()),
                  FormatError);
}

TEST_CASE("typed tuple enumeration") {
  const auto& env = cover();
  State x = far_gripper_state();
  std::vector<ObjectType> types{env.block_type(), env.block_type()};
  int with_rep = 0, distinct = 0;
  for_each_typed_tuple(types, x.objects(), false, [&](auto) { ++with_rep; });
  for_each_typed_tuple(types, x.objects(), true, [&](auto) { ++distinct; });
  CHECK(with_rep == 4);
  CHECK(distinct == 2);
}
