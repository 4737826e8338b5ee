#include "tamp/core/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tamp/core/error.hpp"

namespace tamp {

State::State(std::vector<std::pair<Object, std::vector<double>>> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  auto layout = std::make_shared<Layout>();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [obj, feats] = entries[i];
    if (i > 0 && entries[i - 1].first == obj) {
      throw ContractViolation("object '" + obj.name() + "' appears twice");
    }
    if (feats.size() != obj.type().dim()) {
      throw ContractViolation("object '" + obj.name() + "' expects " +
                              std::to_string(obj.type().dim()) +
                              " features, got " + std::to_string(feats.size()));
    }
    layout->objects.push_back(obj);
    layout->offsets.push_back(offset);
    layout->index.emplace(obj, i);
    values_.insert(values_.end(), feats.begin(), feats.end());
    offset += feats.size();
  }
  layout_ = std::move(layout);
}

const std::vector<Object>& State::objects() const {
  static const std::vector<Object> kEmpty;
  return layout_ ? layout_->objects : kEmpty;
}

bool State::has(Object o) const {
  return layout_ && layout_->index.contains(o);
}

std::size_t State::offset_of(Object o) const {
  if (!layout_) throw ContractViolation("empty state has no objects");
  auto it = layout_->index.find(o);
  if (it == layout_->index.end()) {
    throw ContractViolation("state has no object '" + o.name() + "'");
  }
  return layout_->offsets[it->second];
}

std::span<const double> State::operator[](Object o) const {
  return {values_.data() + offset_of(o), o.type().dim()};
}

std::span<double> State::features(Object o) {
  return {values_.data() + offset_of(o), o.type().dim()};
}

State State::with_objects(
    const std::vector<std::pair<Object, std::vector<double>>>& extra) const {
  std::vector<std::pair<Object, std::vector<double>>> entries;
  for (Object o : objects()) {
    auto f = (*this)[o];
    entries.emplace_back(o, std::vector<double>(f.begin(), f.end()));
  }
  entries.insert(entries.end(), extra.begin(), extra.end());
  return State(std::move(entries));
}

bool operator==(const State& a, const State& b) {
  if (a.objects() != b.objects()) return false;
  return a.values_ == b.values_;
}

double max_abs_difference(const State& a, const State& b) {
  if (a.objects() != b.objects()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    worst = std::max(worst, std::abs(va[i] - vb[i]));
  }
  return worst;
}

}  // namespace tamp
