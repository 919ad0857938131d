#pragma once

#include <cstdint>

#include "fusegraph/boosting.hpp"
#include "fusegraph/synth.hpp"

namespace fusegraph::testing {

struct Quantized {
  WeightedDataset ds;
  FeatureLayout layout;
};

/// Quantizes generator output per feature set (pooled over classes) into a uniform-weight
/// dataset with class 0 as +1.
inline Quantized quantized_synth(const SynthSpec& spec, std::uint64_t seed, int bins) {
  const auto data = synth_fusion_generator(spec, seed);
  const auto layout = spec.layout();
  const Index n = data.samples();
  SymbolMatrix symbols(n, layout.total());
  std::vector<int> cells;
  for (Index set = 0; set < layout.sets(); ++set) {
    const auto q = fit_quantizer(data.sets[static_cast<std::size_t>(set)], bins);
    symbols.middleCols(layout.offset(set), layout.dim(set)) = q.quantize_rows(data.sets[static_cast<std::size_t>(set)]);
    for (int c : q.cell_counts()) cells.push_back(c);
  }
  Eigen::VectorXi labels(n);
  for (Index r = 0; r < n; ++r) labels(r) = data.labels[static_cast<std::size_t>(r)] == 0 ? 1 : -1;
  return {WeightedDataset::uniform(std::move(symbols), std::move(labels), std::move(cells)), layout};
}

}  // namespace fusegraph::testing
