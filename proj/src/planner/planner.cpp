#include "tamp/planner/planner.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <unordered_map>

namespace tamp::planner {

using operators::GroundOperator;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Atoms are numbered once per search; states become fixed-width bitsets.
class AtomIndex {
 public:
  int id(const GroundAtom& a) {
    auto [it, inserted] = ids_.try_emplace(a, static_cast<int>(atoms_.size()));
    if (inserted) atoms_.push_back(a);
    return it->second;
  }
  int find(const GroundAtom& a) const {
    auto it = ids_.find(a);
    return it == ids_.end() ? -1 : it->second;
  }
  std::size_t size() const { return atoms_.size(); }
  const GroundAtom& atom(int i) const { return atoms_[i]; }

 private:
  std::unordered_map<GroundAtom, int> ids_;
  std::vector<GroundAtom> atoms_;
};

using Bits = std::vector<std::uint64_t>;

void set_bit(Bits& b, int i) { b[i / 64] |= std::uint64_t{1} << (i % 64); }
bool test_bit(const Bits& b, int i) { return (b[i / 64] >> (i % 64)) & 1; }

bool subset(const Bits& a, const Bits& b) {
  for (std::size_t w = 0; w < a.size(); ++w) {
    if (a[w] & ~b[w]) return false;
  }
  return true;
}

struct CompiledOp {
  std::vector<int> pre, add;
  Bits pre_mask, add_mask, del_mask;
};

// h_add over compiled operators.
double relaxed_cost(const Bits& state, const std::vector<int>& goal,
                    const std::vector<CompiledOp>& ops, std::size_t n_atoms,
                    std::vector<double>& cost) {
  cost.assign(n_atoms, kInf);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    if (test_bit(state, static_cast<int>(i))) cost[i] = 0.0;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& op : ops) {
      double c = 1.0;
      for (int p : op.pre) {
        c += cost[p];
        if (c == kInf) break;
      }
      if (c == kInf) continue;
      for (int a : op.add) {
        if (c < cost[a]) {
          cost[a] = c;
          changed = true;
        }
      }
    }
  }
  double h = 0.0;
  for (int g : goal) h += cost[g];
  return h;
}

}  // namespace

double heuristic(const AbstractState& s, const GroundAtomSet& goal,
                 std::span<const GroundOperator> ops) {
  AtomIndex index;
  for (const auto& a : s) index.id(a);
  for (const auto& a : goal) index.id(a);
  std::vector<CompiledOp> compiled;
  for (const auto& g : ops) {
    CompiledOp c;
    for (const auto& a : g.preconditions) c.pre.push_back(index.id(a));
    for (const auto& a : g.add_effects) c.add.push_back(index.id(a));
    compiled.push_back(std::move(c));
  }
  Bits bits((index.size() + 63) / 64 + 1, 0);
  for (const auto& a : s) set_bit(bits, index.find(a));
  std::vector<int> goal_ids;
  for (const auto& a : goal) goal_ids.push_back(index.find(a));
  std::vector<double> cost;
  return relaxed_cost(bits, goal_ids, compiled, index.size(), cost);
}

struct TopKStream::Impl {
  AtomIndex index;
  std::vector<GroundOperator> ops;
  std::vector<CompiledOp> compiled;
  std::vector<int> goal_ids;
  Bits goal_mask;
  std::size_t words = 0;
  std::size_t max_nodes = 0;
  std::optional<Clock::time_point> deadline;

  struct Node {
    int parent;
    int op;
    int g;
  };
  std::vector<Node> nodes;
  std::vector<std::uint64_t> pool;  // node i's bits at [i * words, (i + 1) * words)
  struct Entry {
    int g;
    double h;
    std::size_t id;
    bool operator>(const Entry& o) const {
      if (g != o.g) return g > o.g;
      if (h != o.h) return h > o.h;
      return id > o.id;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::vector<double> scratch;
  bool done = false;

  Bits bits_of(std::size_t n) const {
    return Bits(pool.begin() + n * words, pool.begin() + (n + 1) * words);
  }
  bool same(std::size_t n, const Bits& b) const {
    return std::equal(b.begin(), b.end(), pool.begin() + n * words);
  }
  bool on_path(int n, const Bits& b) const {
    for (; n >= 0; n = nodes[n].parent) {
      if (same(n, b)) return true;
    }
    return false;
  }
  bool add_node(int parent, int op, int g, const Bits& b) {
    double h = relaxed_cost(b, goal_ids, compiled, index.size(), scratch);
    if (h == kInf) return true;
    if (nodes.size() >= max_nodes) return false;
    nodes.push_back({parent, op, g});
    pool.insert(pool.end(), b.begin(), b.end());
    frontier.push({g, h, nodes.size() - 1});
    return true;
  }
  AbstractState decode(const Bits& b) const {
    std::vector<GroundAtom> atoms;
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (test_bit(b, static_cast<int>(i))) atoms.push_back(index.atom(static_cast<int>(i)));
    }
    return AbstractState(std::move(atoms));
  }
  AbstractPlan reconstruct(int n) const {
    std::vector<int> chain;
    for (int k = n; k >= 0; k = nodes[k].parent) chain.push_back(k);
    std::reverse(chain.begin(), chain.end());
    AbstractPlan p;
    for (int k : chain) {
      if (nodes[k].op >= 0) p.steps.push_back(ops[nodes[k].op]);
      p.states.push_back(decode(bits_of(k)));
    }
    return p;
  }
};

TopKStream::TopKStream(const AbstractState& s0, const GroundAtomSet& goal,
                       std::vector<GroundOperator> ops, std::size_t max_nodes,
                       std::optional<Clock::time_point> deadline)
    : impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  m.ops = std::move(ops);
  m.max_nodes = max_nodes;
  m.deadline = deadline;
  for (const auto& a : s0) m.index.id(a);
  for (const auto& a : goal) m.goal_ids.push_back(m.index.id(a));
  for (const auto& g : m.ops) {
    for (const auto* set : {&g.preconditions, &g.add_effects, &g.delete_effects}) {
      for (const auto& a : *set) m.index.id(a);
    }
  }
  m.words = (m.index.size() + 63) / 64 + 1;
  auto mask = [&](const GroundAtomSet& s) {
    Bits b(m.words, 0);
    for (const auto& a : s) set_bit(b, m.index.find(a));
    return b;
  };
  for (const auto& g : m.ops) {
    CompiledOp c;
    for (const auto& a : g.preconditions) c.pre.push_back(m.index.find(a));
    for (const auto& a : g.add_effects) c.add.push_back(m.index.find(a));
    c.pre_mask = mask(g.preconditions);
    c.add_mask = mask(g.add_effects);
    c.del_mask = mask(g.delete_effects);
    m.compiled.push_back(std::move(c));
  }
  m.goal_mask = mask(goal);
  m.add_node(-1, -1, 0, mask(s0));
}

TopKStream::~TopKStream() = default;
TopKStream::TopKStream(TopKStream&&) noexcept = default;

std::size_t TopKStream::nodes_created() const { return impl_->nodes.size(); }

std::optional<AbstractPlan> TopKStream::next() {
  Impl& m = *impl_;
  while (!m.done && !m.frontier.empty()) {
    if (m.deadline && Clock::now() >= *m.deadline) break;
    const auto top = m.frontier.top();
    m.frontier.pop();
    const int n = static_cast<int>(top.id);
    const Bits bits = m.bits_of(n);
    if (subset(m.goal_mask, bits)) return m.reconstruct(n);
    for (std::size_t o = 0; o < m.compiled.size(); ++o) {
      const auto& op = m.compiled[o];
      if (!subset(op.pre_mask, bits)) continue;
      Bits child(m.words);
      for (std::size_t w = 0; w < m.words; ++w) {
        child[w] = (bits[w] & ~op.del_mask[w]) | op.add_mask[w];
      }
      if (m.on_path(n, child)) continue;
      if (!m.add_node(n, static_cast<int>(o), top.g + 1, child)) {
        m.done = true;
        break;
      }
    }
  }
  m.done = true;
  return std::nullopt;
}

std::vector<GroundOperator> ground_all(std::span<const operators::Operator* const> ops,
                                       std::span<const Object> objects) {
  std::vector<Object> sorted(objects.begin(), objects.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<GroundOperator> out;
  for (const auto* op : ops) {
    auto g = operators::ground(*op, sorted);
    out.insert(out.end(), std::make_move_iterator(g.begin()), std::make_move_iterator(g.end()));
  }
  return out;
}

LearnedRuntime::LearnedRuntime(const std::vector<skills::Skill>& skills,
                               const envs::Environment& env, std::vector<Predicate> preds)
    : skills_(skills), env_(env), preds_(std::move(preds)) {}

nn::Vector LearnedRuntime::sample(std::size_t i, std::span<const Object> objects,
                                  const State& x, Rng& rng) const {
  return skills::sample_parameter(skills_[i], objects, x, rng);
}

skills::Rollout LearnedRuntime::execute(std::size_t i, std::span<const Object> objects,
                                        const State& x, const nn::Vector& param,
                                        const AbstractState& expected) const {
  return skills::execute_policy(skills_[i], objects, x, param, env_, preds_, expected);
}

namespace {

std::size_t skill_index(const SkillRuntime& skills, const operators::Operator* op) {
  for (std::size_t i = 0; i < skills.size(); ++i) {
    if (&skills.op(i) == op) return i;
  }
  throw ContractViolation("plan step does not belong to the skill set");
}

}  // namespace

std::optional<std::vector<Action>> refine(const AbstractPlan& plan, const Task& task,
                                          const SkillRuntime& skills,
                                          const PlannerConfig& config, std::uint64_t seed,
                                          std::size_t plan_index, Clock::time_point deadline,
                                          Metrics& metrics) {
  const std::size_t n = plan.steps.size();
  if (plan.states.size() != n + 1) throw ContractViolation("malformed abstract plan");
  std::vector<std::size_t> which(n);
  for (std::size_t i = 0; i < n; ++i) which[i] = skill_index(skills, plan.steps[i].op);

  std::vector<State> states{task.init};
  std::vector<std::vector<Action>> pieces;
  std::vector<int> tries(n, 0);          // draws in the current visit
  std::vector<std::uint64_t> draws(n, 0);  // draws ever, for seeding
  std::size_t length = 0;
  std::size_t i = 0;
  while (i < n) {
    if (Clock::now() >= deadline) {
      metrics.timed_out = true;
      return std::nullopt;
    }
    const int limit = skills.stochastic(which[i]) ? config.n_samples : 1;
    if (tries[i] >= limit) {
      tries[i] = 0;
      if (i == 0) return std::nullopt;
      --i;
      length -= pieces.back().size();
      pieces.pop_back();
      states.pop_back();
      continue;
    }
    ++tries[i];
    Rng rng(derive_seed({seed, plan_index, i, draws[i]++}));
    const auto& objs = plan.steps[i].objects;
    nn::Vector param = skills.sample(which[i], objs, states[i], rng);
    ++metrics.samples_drawn;
    skills::Rollout r = skills.execute(which[i], objs, states[i], param, plan.states[i + 1]);
    if (r.outcome != skills::Outcome::kSuccess) continue;
    if (length + r.actions.size() > static_cast<std::size_t>(task.horizon)) continue;
    length += r.actions.size();
    pieces.push_back(std::move(r.actions));
    states.push_back(std::move(r.states.back()));
    ++i;
  }
  std::vector<Action> out;
  out.reserve(length);
  for (auto& p : pieces) {
    for (auto& a : p) out.push_back(std::move(a));
  }
  return out;
}

PlanResult plan(const Task& task, const SkillRuntime& skills, const envs::Environment& env,
                std::span<const Predicate> preds, const PlannerConfig& config,
                std::uint64_t seed) {
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(config.timeout_s));
  PlanResult result;
  std::vector<const operators::Operator*> ops;
  for (std::size_t i = 0; i < skills.size(); ++i) ops.push_back(&skills.op(i));
  TopKStream stream(abstract(task.init, preds), task.goal, ground_all(ops, task.objects),
                    config.max_nodes, deadline);
  for (int k = 0; k < config.n_abstract; ++k) {
    auto p = stream.next();
    if (!p) break;
    ++result.metrics.plans_tried;
    auto actions = refine(*p, task, skills, config, seed, static_cast<std::size_t>(k),
                          deadline, result.metrics);
    if (actions && envs::solves(env, task, *actions, preds)) {
      result.metrics.solved = true;
      result.metrics.solution_length = actions->size();
      result.actions = std::move(actions);
      break;
    }
    if (Clock::now() >= deadline) {
      result.metrics.timed_out = true;
      break;
    }
  }
  if (!result.metrics.solved && Clock::now() >= deadline) result.metrics.timed_out = true;
  result.metrics.nodes_created = stream.nodes_created();
  result.metrics.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

}  // namespace tamp::planner
