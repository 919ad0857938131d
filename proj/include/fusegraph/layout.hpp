#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "fusegraph/distributions.hpp"

namespace fusegraph {

/// Partition of the concatenated variable vector into M feature sets.
class FeatureLayout {
public:
  FeatureLayout() = default;
  explicit FeatureLayout(std::vector<Index> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ConfigError("layout: at least one feature set is required");
    offsets_.assign(dims_.size() + 1, 0);
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (dims_[i] < 1) throw ConfigError("layout: feature set " + std::to_string(i) + " is empty");
      offsets_[i + 1] = offsets_[i] + dims_[i];
    }
  }

  Index sets() const { return static_cast<Index>(dims_.size()); }
  Index dim(Index set) const { return dims_[static_cast<std::size_t>(set)]; }
  Index offset(Index set) const { return offsets_[static_cast<std::size_t>(set)]; }
  Index total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<Index>& dims() const { return dims_; }
  const std::vector<Index>& offsets() const { return offsets_; }

  Index set_of(Index variable) const {
    for (std::size_t i = 0; i + 1 < offsets_.size(); ++i)
      if (variable < offsets_[i + 1]) return static_cast<Index>(i);
    throw ConfigError("layout: variable outside layout");
  }

  std::vector<Index> variables(Index set) const {
    std::vector<Index> out(static_cast<std::size_t>(dim(set)));
    std::iota(out.begin(), out.end(), offset(set));
    return out;
  }

  std::vector<Index> all_variables() const {
    std::vector<Index> out(static_cast<std::size_t>(total()));
    std::iota(out.begin(), out.end(), Index{0});
    return out;
  }

  friend bool operator==(const FeatureLayout&, const FeatureLayout&) = default;

private:
  std::vector<Index> dims_;
  std::vector<Index> offsets_;
};

}  // namespace fusegraph
