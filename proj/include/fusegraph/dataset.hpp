#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "fusegraph/layout.hpp"

namespace fusegraph {

/// M row-aligned feature matrices; row r of every matrix belongs to sample r.
using FeatureSets = std::vector<Eigen::MatrixXd>;

/// One sample: a vector per feature set.
using Sample = std::vector<Eigen::VectorXd>;

/// Feature sets with a class index per row.
struct LabeledFeatures {
  FeatureSets sets;
  std::vector<int> labels;               // index into class_names
  std::vector<std::string> class_names;  // order of first appearance unless supplied

  Index samples() const { return sets.empty() ? 0 : sets.front().rows(); }
  FeatureLayout layout() const;
};

Index sample_count(const FeatureSets& sets);
Sample sample_row(const FeatureSets& sets, Index row);
FeatureSets select_rows(const FeatureSets& sets, std::span<const Index> rows);
FeatureSets concat_rows(std::span<const FeatureSets> parts);

/// Per-class feature sets in class_names order.
std::vector<FeatureSets> split_by_class(const LabeledFeatures& data);

/// Stacks per-class sets back into one labeled table (class k rows labeled k).
LabeledFeatures join_classes(std::span<const FeatureSets> per_class, std::vector<std::string> class_names);

/// Throws DataError if sets disagree in row count or do not match `layout`.
void check_layout(const FeatureSets& sets, const FeatureLayout& layout);

}  // namespace fusegraph
