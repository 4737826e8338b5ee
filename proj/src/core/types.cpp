#include "tamp/core/types.hpp"

#include <deque>
#include <mutex>
#include <unordered_map>

#include "tamp/core/error.hpp"

namespace tamp {
namespace {

struct Registry {
  std::mutex mutex;
  std::deque<detail::TypeRecord> types;
  std::unordered_map<std::string, const detail::TypeRecord*> type_index;
  std::deque<detail::TermRecord> objects;
  std::unordered_map<std::string, const detail::TermRecord*> object_index;
  std::deque<detail::TermRecord> variables;
  std::unordered_map<std::string, const detail::TermRecord*> variable_index;
};

Registry& registry() {
  static Registry r;
  return r;
}

const detail::TermRecord* intern_term(std::deque<detail::TermRecord>& pool,
                                      std::unordered_map<std::string, const detail::TermRecord*>& index,
                                      std::string_view name,
                                      const detail::TypeRecord* type,
                                      const char* what) {
  auto it = index.find(std::string(name));
  if (it != index.end()) {
    if (it->second->type != type) {
      throw ContractViolation(std::string(what) + " '" + std::string(name) +
                              "' already interned with type '" +
                              it->second->type->name + "'");
    }
    return it->second;
  }
  pool.push_back({std::string(name), type});
  index.emplace(pool.back().name, &pool.back());
  return &pool.back();
}

}  // namespace

ObjectType ObjectType::intern(std::string_view name,
                              const std::vector<std::string>& features) {
  if (features.empty()) {
    throw ContractViolation("type '" + std::string(name) + "' has no features");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (std::size_t j = i + 1; j < features.size(); ++j) {
      if (features[i] == features[j]) {
        throw ContractViolation("duplicate feature '" + features[i] +
                                "' in type '" + std::string(name) + "'");
      }
    }
  }
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  auto it = reg.type_index.find(std::string(name));
  if (it != reg.type_index.end()) {
    if (it->second->features != features) {
      throw ContractViolation("type '" + std::string(name) +
                              "' already interned with other features");
    }
    return ObjectType(it->second);
  }
  reg.types.push_back({std::string(name), features});
  reg.type_index.emplace(reg.types.back().name, &reg.types.back());
  return ObjectType(&reg.types.back());
}

std::optional<ObjectType> ObjectType::find(std::string_view name) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  auto it = reg.type_index.find(std::string(name));
  if (it == reg.type_index.end()) return std::nullopt;
  return ObjectType(it->second);
}

std::size_t ObjectType::feature_index(std::string_view feature) const {
  for (std::size_t i = 0; i < rec_->features.size(); ++i) {
    if (rec_->features[i] == feature) return i;
  }
  throw ContractViolation("type '" + name() + "' has no feature '" +
                          std::string(feature) + "'");
}

Object Object::intern(std::string_view name, ObjectType type) {
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  return Object(intern_term(reg.objects, reg.object_index, name, type.rec_,
                            "object"));
}

Variable Variable::intern(std::string_view name, ObjectType type) {
  if (name.empty() || name.front() != '?') {
    throw ContractViolation("variable names start with '?': " +
                            std::string(name));
  }
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  return Variable(intern_term(reg.variables, reg.variable_index, name,
                              type.rec_, "variable"));
}

}  // namespace tamp
