#pragma once

#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tamp/core/types.hpp"

namespace tamp {

using Action = std::vector<double>;

/// Assignment of objects to feature vectors. Objects are kept in canonical
/// (name) order; the layout is shared between copies so copying a state only
/// copies its values.
class State {
 public:
  State() = default;
  explicit State(std::vector<std::pair<Object, std::vector<double>>> entries);

  const std::vector<Object>& objects() const;
  std::size_t size() const { return layout_ ? layout_->objects.size() : 0; }
  bool has(Object o) const;

  std::span<const double> operator[](Object o) const;
  std::span<double> features(Object o);
  double get(Object o, std::size_t feature) const { return (*this)[o][feature]; }
  void set(Object o, std::size_t feature, double value) {
    features(o)[feature] = value;
  }

  /// Every feature of every object, concatenated in canonical object order.
  std::span<const double> values() const { return values_; }

  /// Same objects, with `extra` appended (used to inject objects into tasks).
  State with_objects(
      const std::vector<std::pair<Object, std::vector<double>>>& extra) const;

  friend bool operator==(const State& a, const State& b);

 private:
  struct Layout {
    std::vector<Object> objects;
    std::vector<std::size_t> offsets;
    std::unordered_map<Object, std::size_t> index;
  };
  std::size_t offset_of(Object o) const;

  std::shared_ptr<const Layout> layout_;
  std::vector<double> values_;
};

/// Max absolute per-feature difference; infinity if the object sets differ.
double max_abs_difference(const State& a, const State& b);

}  // namespace tamp
