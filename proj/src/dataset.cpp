#include "fusegraph/dataset.hpp"

#include <string>

namespace fusegraph {

FeatureLayout LabeledFeatures::layout() const {
  std::vector<Index> dims;
  for (const auto& m : sets) dims.push_back(m.cols());
  return FeatureLayout(std::move(dims));
}

Index sample_count(const FeatureSets& sets) {
  if (sets.empty()) throw DataError("feature sets: no feature sets");
  const Index n = sets.front().rows();
  for (const auto& m : sets)
    if (m.rows() != n) throw DataError("feature sets: row counts differ between feature sets");
  return n;
}

Sample sample_row(const FeatureSets& sets, Index row) {
  Sample out;
  out.reserve(sets.size());
  for (const auto& m : sets) out.emplace_back(m.row(row).transpose());
  return out;
}

FeatureSets select_rows(const FeatureSets& sets, std::span<const Index> rows) {
  FeatureSets out;
  out.reserve(sets.size());
  for (const auto& m : sets) {
    Eigen::MatrixXd sub(static_cast<Index>(rows.size()), m.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Index>(r)) = m.row(rows[r]);
    out.push_back(std::move(sub));
  }
  return out;
}

FeatureSets concat_rows(std::span<const FeatureSets> parts) {
  if (parts.empty()) throw DataError("feature sets: nothing to concatenate");
  const std::size_t m = parts.front().size();
  FeatureSets out(m);
  for (std::size_t set = 0; set < m; ++set) {
    Index rows = 0;
    const Index cols = parts.front()[set].cols();
    for (const auto& p : parts) {
      if (p.size() != m || p[set].cols() != cols) throw DataError("feature sets: shape mismatch between parts");
      rows += p[set].rows();
    }
    Eigen::MatrixXd stacked(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
      stacked.middleRows(at, p[set].rows()) = p[set];
      at += p[set].rows();
    }
    out[set] = std::move(stacked);
  }
  return out;
}

std::vector<FeatureSets> split_by_class(const LabeledFeatures& data) {
  std::vector<std::vector<Index>> rows(data.class_names.size());
  for (std::size_t r = 0; r < data.labels.size(); ++r) {
    const int k = data.labels[r];
    if (k < 0 || k >= static_cast<int>(rows.size())) throw DataError("labels: class index out of range");
    rows[static_cast<std::size_t>(k)].push_back(static_cast<Index>(r));
  }
  std::vector<FeatureSets> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(select_rows(data.sets, r));
  return out;
}

LabeledFeatures join_classes(std::span<const FeatureSets> per_class, std::vector<std::string> class_names) {
  LabeledFeatures out;
  out.sets = concat_rows(per_class);
  out.class_names = std::move(class_names);
  for (std::size_t k = 0; k < per_class.size(); ++k) {
    const Index n = sample_count(per_class[k]);
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(n), static_cast<int>(k));
  }
  return out;
}

void check_layout(const FeatureSets& sets, const FeatureLayout& layout) {
  if (static_cast<Index>(sets.size()) != layout.sets())
    throw DataError("feature sets: expected " + std::to_string(layout.sets()) + " feature sets, got " +
                    std::to_string(sets.size()));
  sample_count(sets);
  for (Index i = 0; i < layout.sets(); ++i)
    if (sets[static_cast<std::size_t>(i)].cols() != layout.dim(i))
      throw DataError("feature sets: set " + std::to_string(i) + " has " +
                      std::to_string(sets[static_cast<std::size_t>(i)].cols()) + " columns, layout expects " +
                      std::to_string(layout.dim(i)));
}

}  // namespace fusegraph
