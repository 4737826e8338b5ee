#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tamp {

namespace detail {
struct TypeRecord {
  std::string name;
  std::vector<std::string> features;
};
struct TermRecord {
  std::string name;
  const TypeRecord* type;
};
}  // namespace detail

/// Interned object type. Two handles are equal iff they name the same entry.
class ObjectType {
 public:
  ObjectType() = default;

  /// Returns the interned type, creating it on first use. Throws if a type
  /// with this name already exists with a different feature list.
  static ObjectType intern(std::string_view name,
                           const std::vector<std::string>& features);
  static std::optional<ObjectType> find(std::string_view name);

  const std::string& name() const { return rec_->name; }
  const std::vector<std::string>& features() const { return rec_->features; }
  std::size_t dim() const { return rec_->features.size(); }
  std::size_t feature_index(std::string_view feature) const;
  bool valid() const { return rec_ != nullptr; }

  friend bool operator==(ObjectType a, ObjectType b) { return a.rec_ == b.rec_; }
  friend std::strong_ordering operator<=>(ObjectType a, ObjectType b) {
    return a.name() <=> b.name();
  }

 private:
  explicit ObjectType(const detail::TypeRecord* rec) : rec_(rec) {}
  const detail::TypeRecord* rec_ = nullptr;

  friend class Object;
  friend class Variable;
  friend struct std::hash<ObjectType>;
};

/// Interned, typed object. Names are globally unique.
class Object {
 public:
  Object() = default;
  static Object intern(std::string_view name, ObjectType type);

  const std::string& name() const { return rec_->name; }
  ObjectType type() const { return ObjectType(rec_->type); }
  bool valid() const { return rec_ != nullptr; }
  const void* id() const { return rec_; }

  friend bool operator==(Object a, Object b) { return a.rec_ == b.rec_; }
  friend std::strong_ordering operator<=>(Object a, Object b) {
    return a.name() <=> b.name();
  }

 private:
  explicit Object(const detail::TermRecord* rec) : rec_(rec) {}
  const detail::TermRecord* rec_ = nullptr;
  friend struct std::hash<Object>;
};

/// Interned typed placeholder; names start with '?'.
class Variable {
 public:
  Variable() = default;
  static Variable intern(std::string_view name, ObjectType type);

  const std::string& name() const { return rec_->name; }
  ObjectType type() const { return ObjectType(rec_->type); }
  bool valid() const { return rec_ != nullptr; }

  friend bool operator==(Variable a, Variable b) { return a.rec_ == b.rec_; }
  friend std::strong_ordering operator<=>(Variable a, Variable b) {
    return a.name() <=> b.name();
  }

 private:
  explicit Variable(const detail::TermRecord* rec) : rec_(rec) {}
  const detail::TermRecord* rec_ = nullptr;
  friend struct std::hash<Variable>;
};

}  // namespace tamp

template <>
struct std::hash<tamp::ObjectType> {
  std::size_t operator()(tamp::ObjectType t) const noexcept {
    return std::hash<const void*>{}(t.rec_);
  }
};
template <>
struct std::hash<tamp::Object> {
  std::size_t operator()(tamp::Object o) const noexcept {
    return std::hash<const void*>{}(o.rec_);
  }
};
template <>
struct std::hash<tamp::Variable> {
  std::size_t operator()(tamp::Variable v) const noexcept {
    return std::hash<const void*>{}(v.rec_);
  }
};
