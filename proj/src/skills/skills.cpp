#include "tamp/skills/skills.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tamp::skills {

using nn::Matrix;
using nn::Vector;
using preprocess::LiftedSkillDataset;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kSubgoal: return "subgoal";
    case Mode::kNoSubgoal: return "no_subgoal";
    case Mode::kPassThrough: return "pass_through";
  }
  return "subgoal";
}

Mode parse_mode(std::string_view s) {
  if (s == "subgoal") return Mode::kSubgoal;
  if (s == "no_subgoal") return Mode::kNoSubgoal;
  if (s == "pass_through") return Mode::kPassThrough;
  throw FormatError("unknown skill mode '" + std::string(s) + "'");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kWrongTransition: return "wrong_transition";
  }
  return "timeout";
}

Vector scoped_vector(const State& x, std::span<const Object> objects) {
  std::size_t n = 0;
  for (Object o : objects) n += o.type().dim();
  Vector v(n);
  std::size_t k = 0;
  for (Object o : objects) {
    for (double f : x[o]) v[k++] = f;
  }
  return v;
}

void write_scoped(State& x, std::span<const Object> objects, const Vector& v) {
  std::size_t k = 0;
  for (Object o : objects) {
    auto f = x.features(o);
    if (k + f.size() > static_cast<std::size_t>(v.size())) {
      throw ContractViolation("scoped vector is too short for its objects");
    }
    for (double& d : f) d = v[k++];
  }
  if (k != static_cast<std::size_t>(v.size())) {
    throw ContractViolation("scoped vector is too long for its objects");
  }
}

std::size_t scoped_dim(std::span<const Variable> vars) {
  std::size_t n = 0;
  for (Variable v : vars) n += v.type().dim();
  return n;
}

namespace {

Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

Vector remove_dims(const Vector& v, std::span<const std::size_t> drop) {
  Vector out(v.size() - static_cast<Eigen::Index>(drop.size()));
  std::size_t k = 0, d = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (d < drop.size() && drop[d] == static_cast<std::size_t>(i)) {
      ++d;
      continue;
    }
    out[k++] = v[i];
  }
  return out;
}

Matrix stack(const std::vector<Vector>& rows, Eigen::Index cols) {
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

Vector action_vector(const Action& a) {
  return Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
}

AbstractState contact_part(const AbstractState& s) {
  std::vector<GroundAtom> out;
  for (const auto& a : s) {
    if (a.predicate.is_contact()) out.push_back(a);
  }
  return AbstractState(std::move(out));
}

}  // namespace

Vector Skill::dynamic_part(const Vector& relative) const {
  return remove_dims(relative, static_dims);
}

Action Skill::act(const Vector& xs, const Vector& param) const {
  Vector out;
  switch (mode) {
    case Mode::kPassThrough:
      out = param;
      break;
    case Mode::kNoSubgoal:
      out = policy->predict(xs);
      break;
    case Mode::kSubgoal:
      out = policy->predict(concat(xs, dynamic_part(param - xs)));
      break;
  }
  return Action(out.data(), out.data() + out.size());
}

std::vector<Object> segment_objects(const LiftedSkillDataset& lds, std::size_t i) {
  std::vector<Object> objs(lds.variables.size());
  for (const auto& [o, v] : lds.object_maps.at(i)) {
    auto it = std::find(lds.variables.begin(), lds.variables.end(), v);
    if (it == lds.variables.end()) throw ContractViolation("object map names an unknown variable");
    objs[it - lds.variables.begin()] = o;
  }
  for (Object o : objs) {
    if (!o.valid()) throw ContractViolation("segment leaves a variable unbound");
  }
  return objs;
}

std::pair<std::vector<std::size_t>, std::vector<double>> static_dimensions(
    const LiftedSkillDataset& lds, double tolerance) {
  const std::size_t n = scoped_dim(lds.variables);
  Vector lo = Vector::Constant(n, INFINITY), hi = Vector::Constant(n, -INFINITY);
  for (std::size_t s = 0; s < lds.dataset.segments.size(); ++s) {
    const auto& seg = lds.dataset.segments[s];
    auto objs = segment_objects(lds, s);
    Vector goal = scoped_vector(seg.states.back(), objs);
    for (std::size_t i = 0; i + 1 < seg.states.size(); ++i) {
      Vector rel = goal - scoped_vector(seg.states[i], objs);
      lo = lo.cwiseMin(rel);
      hi = hi.cwiseMax(rel);
    }
  }
  std::vector<std::size_t> dims;
  std::vector<double> values;
  for (std::size_t d = 0; d < n; ++d) {
    if (hi[d] >= lo[d] && hi[d] - lo[d] < tolerance) {
      dims.push_back(d);
      values.push_back(lo[d]);
    }
  }
  return {dims, values};
}

Pairs build_policy_dataset(const LiftedSkillDataset& lds,
                           std::span<const std::size_t> static_dims, Mode mode) {
  std::vector<Vector> in, out;
  for (std::size_t s = 0; s < lds.dataset.segments.size(); ++s) {
    const auto& seg = lds.dataset.segments[s];
    auto objs = segment_objects(lds, s);
    Vector goal = scoped_vector(seg.states.back(), objs);
    for (std::size_t i = 0; i < seg.actions.size(); ++i) {
      Vector xs = scoped_vector(seg.states[i], objs);
      in.push_back(mode == Mode::kNoSubgoal ? xs
                                            : concat(xs, remove_dims(goal - xs, static_dims)));
      out.push_back(action_vector(seg.actions[i]));
    }
  }
  if (in.empty()) throw ContractViolation("skill dataset has no demonstrated steps");
  return {stack(in, in[0].size()), stack(out, out[0].size())};
}

Pairs build_sampler_dataset(const LiftedSkillDataset& lds,
                            std::span<const std::size_t> static_dims, Mode mode) {
  std::vector<Vector> in, out;
  for (std::size_t s = 0; s < lds.dataset.segments.size(); ++s) {
    const auto& seg = lds.dataset.segments[s];
    if (seg.actions.empty()) continue;
    auto objs = segment_objects(lds, s);
    Vector xs = scoped_vector(seg.states.front(), objs);
    in.push_back(xs);
    if (mode == Mode::kPassThrough) {
      out.push_back(action_vector(seg.actions.front()));
    } else {
      out.push_back(remove_dims(scoped_vector(seg.states.back(), objs) - xs, static_dims));
    }
  }
  if (in.empty()) throw ContractViolation("skill dataset has no demonstrated steps");
  return {stack(in, in[0].size()), stack(out, out[0].size())};
}

int skill_horizon(const LiftedSkillDataset& lds, const SkillTrainConfig& cfg) {
  std::size_t longest = 0;
  for (const auto& seg : lds.dataset.segments) longest = std::max(longest, seg.actions.size());
  int h = static_cast<int>(std::ceil(cfg.horizon_factor * static_cast<double>(longest)));
  return std::max(cfg.min_horizon, h);
}

namespace {

std::vector<ObjectType> signature(std::span<const Variable> vars) {
  std::vector<ObjectType> out;
  for (Variable v : vars) out.push_back(v.type());
  return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix m(a.rows(), a.cols() + b.cols());
  m << a, b;
  return m;
}

// Positives: this dataset's (state, parameter) rows. Negatives: the same rows
// from every other dataset with the same argument types, or noisy positives.
Pairs classifier_data(std::size_t self, const std::vector<Pairs>& sampler_data,
                      const std::vector<std::vector<ObjectType>>& sigs,
                      const std::vector<LiftedSkillDataset>& datasets,
                      const std::vector<std::vector<std::size_t>>& statics, Mode mode,
                      const SkillTrainConfig& cfg) {
  Matrix pos = concat_cols(sampler_data[self].inputs, sampler_data[self].targets);
  std::vector<Matrix> negs;
  for (std::size_t j = 0; j < datasets.size(); ++j) {
    if (j == self || sigs[j] != sigs[self]) continue;
    Pairs p = build_sampler_dataset(datasets[j], statics[self], mode);
    negs.push_back(concat_cols(p.inputs, p.targets));
  }
  Matrix neg;
  if (negs.empty()) {
    Rng rng(derive_seed({cfg.seed, self, 0x6e6f69ULL}));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector mean = pos.colwise().mean().transpose();
    Vector sd(pos.cols());
    for (Eigen::Index d = 0; d < pos.cols(); ++d) {
      sd[d] = std::sqrt((pos.col(d).array() - mean[d]).square().mean());
    }
    neg = pos;
    for (Eigen::Index i = 0; i < neg.rows(); ++i) {
      for (Eigen::Index d = 0; d < neg.cols(); ++d) {
        neg(i, d) += cfg.negative_noise * sd[d] * normal(rng);
      }
    }
  } else {
    Eigen::Index rows = 0;
    for (const auto& m : negs) rows += m.rows();
    neg.resize(rows, pos.cols());
    Eigen::Index r = 0;
    for (const auto& m : negs) {
      neg.middleRows(r, m.rows()) = m;
      r += m.rows();
    }
  }
  Pairs out;
  out.inputs.resize(pos.rows() + neg.rows(), pos.cols());
  out.inputs << pos, neg;
  out.targets = Matrix::Zero(out.inputs.rows(), 1);
  out.targets.topRows(pos.rows()).setOnes();
  return out;
}

}  // namespace

std::vector<Skill> learn_skills(const std::vector<LiftedSkillDataset>& datasets,
                                const std::vector<operators::Operator>& ops,
                                const SkillTrainConfig& cfg) {
  if (datasets.size() != ops.size()) throw ContractViolation("one operator per dataset");
  const std::size_t n = datasets.size();
  std::vector<Skill> skills(n);
  std::vector<std::vector<std::size_t>> statics(n);
  std::vector<std::vector<ObjectType>> sigs(n);
  std::vector<Pairs> policy_data(n), sampler_data(n), classifier_sets(n);

  for (std::size_t i = 0; i < n; ++i) {
    Skill& s = skills[i];
    s.op = ops[i];
    s.mode = cfg.mode;
    s.horizon = skill_horizon(datasets[i], cfg);
    s.dataset_size = datasets[i].dataset.segments.size();
    for (const auto& seg : datasets[i].dataset.segments) {
      s.max_segment_length = std::max(s.max_segment_length, seg.actions.size());
    }
    s.rejection_tries = cfg.rejection_tries;
    if (cfg.mode == Mode::kSubgoal) {
      std::tie(s.static_dims, s.static_values) =
          static_dimensions(datasets[i], cfg.static_tolerance);
    }
    statics[i] = s.static_dims;
    sigs[i] = signature(datasets[i].variables);
    if (cfg.mode != Mode::kPassThrough) {
      policy_data[i] = build_policy_dataset(datasets[i], s.static_dims, cfg.mode);
    }
    if (cfg.mode != Mode::kNoSubgoal) {
      sampler_data[i] = build_sampler_dataset(datasets[i], s.static_dims, cfg.mode);
    }
  }
  // A subgoal with every dimension static is deterministic: no sampler.
  std::vector<bool> sampled(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    sampled[i] = cfg.mode != Mode::kNoSubgoal && sampler_data[i].targets.cols() > 0;
    if (sampled[i]) {
      classifier_sets[i] = classifier_data(i, sampler_data, sigs, datasets, statics, cfg.mode, cfg);
    }
  }

  // Every network is an independent job; seeds depend only on (skill, role).
  struct Job {
    std::size_t skill;
    int role;  // 0 policy, 1 generator, 2 classifier
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.mode != Mode::kPassThrough) jobs.push_back({i, 0});
    if (sampled[i]) {
      jobs.push_back({i, 1});
      jobs.push_back({i, 2});
    }
  }
  std::vector<std::optional<nn::Network>> nets(jobs.size());
  std::vector<std::string> errors(jobs.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto [i, role] = jobs[j];
    try {
      if (role == 0) {
        nn::TrainConfig c = cfg.policy;
        c.seed = derive_seed({cfg.seed, i, 0});
        nets[j] = nn::train(policy_data[i].inputs, policy_data[i].targets, nn::Loss::kMse, c);
      } else if (role == 1) {
        nn::TrainConfig c = cfg.generator;
        c.seed = derive_seed({cfg.seed, i, 1});
        nets[j] = nn::train(sampler_data[i].inputs, sampler_data[i].targets,
                            nn::Loss::kGaussianNll, c);
      } else {
        nn::TrainConfig c = cfg.classifier;
        c.seed = derive_seed({cfg.seed, i, 2});
        nets[j] = nn::train(classifier_sets[i].inputs, classifier_sets[i].targets,
                            nn::Loss::kBce, c);
      }
    } catch (const std::exception& e) {
      errors[j] = ops[jobs[j].skill].name + ": " + e.what();
    }
  }
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) throw nn::TrainingError(errors[j]);
    Skill& s = skills[jobs[j].skill];
    (jobs[j].role == 0 ? s.policy : jobs[j].role == 1 ? s.generator : s.classifier) =
        std::move(nets[j]);
  }
  return skills;
}

Vector sample_parameter(const Skill& skill, std::span<const Object> objects,
                        const State& x, Rng& rng, int* draws) {
  if (draws) *draws = 0;
  if (skill.mode == Mode::kNoSubgoal) return {};
  Vector xs = scoped_vector(x, objects);
  Vector d, mean, var;
  if (skill.has_sampler()) std::tie(mean, var) = skill.generator->predict_gaussian(xs);
  for (int t = 0; skill.has_sampler() && t < std::max(1, skill.rejection_tries); ++t) {
    d = nn::sample_gaussian(mean, var, rng);
    if (draws) ++*draws;
    if (!skill.classifier || skill.classifier->predict(concat(xs, d))[0] > 0.5) break;
  }
  if (skill.mode == Mode::kPassThrough) return d;
  // Rebuild the full relative vector, then make it absolute.
  Vector rel(xs.size());
  std::size_t k = 0, s = 0;
  for (Eigen::Index i = 0; i < rel.size(); ++i) {
    if (s < skill.static_dims.size() && skill.static_dims[s] == static_cast<std::size_t>(i)) {
      rel[i] = skill.static_values[s++];
    } else {
      rel[i] = d[k++];
    }
  }
  return xs + rel;
}

State subgoal_state(const State& x, std::span<const Object> objects, const Vector& param) {
  State out = x;
  write_scoped(out, objects, param);
  return out;
}

Rollout execute_policy(const Skill& skill, std::span<const Object> objects,
                       const State& x0, const Vector& param, const envs::Environment& env,
                       std::span<const Predicate> preds, const AbstractState& expected) {
  Rollout r;
  r.states.push_back(x0);
  AbstractState s = abstract(x0, preds);
  if (s == expected) {
    r.outcome = Outcome::kSuccess;
    return r;
  }
  const AbstractState start_contacts = contact_part(s);
  for (int t = 0; t < skill.horizon; ++t) {
    Action a = skill.act(scoped_vector(r.states.back(), objects), param);
    State next = env.step(r.states.back(), a);
    r.actions.push_back(std::move(a));
    r.states.push_back(std::move(next));
    s = abstract(r.states.back(), preds);
    if (s == expected) {
      r.outcome = Outcome::kSuccess;
      return r;
    }
    if (contact_part(s) != start_contacts) {
      r.outcome = Outcome::kWrongTransition;
      return r;
    }
  }
  r.outcome = Outcome::kTimeout;
  return r;
}

namespace {

nlohmann::json optional_net(const std::optional<nn::Network>& n) {
  return n ? nn::to_json(*n) : nlohmann::json(nullptr);
}

std::optional<nn::Network> net_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return nn::network_from_json(j);
}

}  // namespace

nlohmann::json to_json(const Skill& s) {
  return {{"operator", operators::render_operator(s.op)},
          {"mode", to_string(s.mode)},
          {"horizon", s.horizon},
          {"static_dims", s.static_dims},
          {"static_values", s.static_values},
          {"dataset_size", s.dataset_size},
          {"max_segment_length", s.max_segment_length},
          {"rejection_tries", s.rejection_tries},
          {"policy", optional_net(s.policy)},
          {"generator", optional_net(s.generator)},
          {"classifier", optional_net(s.classifier)}};
}

Skill skill_from_json(const nlohmann::json& j, std::span<const Predicate> preds,
                      std::span<const ObjectType> types) {
  Skill s;
  try {
    s.op = operators::parse_operator(j.at("operator").get<std::string>(), preds, types);
    s.mode = parse_mode(j.at("mode").get<std::string>());
    s.horizon = j.at("horizon").get<int>();
    s.static_dims = j.at("static_dims").get<std::vector<std::size_t>>();
    s.static_values = j.at("static_values").get<std::vector<double>>();
    s.dataset_size = j.at("dataset_size").get<std::size_t>();
    s.max_segment_length = j.at("max_segment_length").get<std::size_t>();
    s.rejection_tries = j.at("rejection_tries").get<int>();
    s.policy = net_from(j.at("policy"));
    s.generator = net_from(j.at("generator"));
    s.classifier = net_from(j.at("classifier"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad skill record: ") + e.what());
  }
  if (s.horizon <= 0) throw FormatError("skill horizon must be positive");
  if (s.static_dims.size() != s.static_values.size()) {
    throw FormatError("static dimension list and values differ in length");
  }
  const bool needs_policy = s.mode != Mode::kPassThrough;
  const bool allows_sampler = s.mode != Mode::kNoSubgoal;
  if (needs_policy != s.policy.has_value() || (!allows_sampler && s.generator) ||
      s.generator.has_value() != s.classifier.has_value()) {
    throw FormatError("skill networks do not match its mode");
  }
  return s;
}

}  // namespace tamp::skills
