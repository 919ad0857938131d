#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fusegraph/dataset.hpp"

namespace fusegraph {

/// Two-class generator of discrete tree-structured data with class-p-only coupling
/// between designated variables of different feature sets.
///
/// Within each feature set the variables form a chain. Along every tree edge a child
/// copies its parent with probability `strength` and is otherwise drawn uniformly, so
/// all marginals are uniform. Cross-set pairs use `cross_strength` under class p and
/// are independent under class q. Emitted features are symbol + jitter * U[0, 1).
struct SynthSpec {
  std::vector<Index> dims{4, 4, 4};
  int symbols = 2;
  double within_p = 0.6;
  double within_q = 0.3;
  double cross_strength = 0.8;
  std::vector<std::pair<Index, Index>> cross_pairs{{0, 4}, {7, 11}};  // global variable ids
  double jitter = 1.0;
  Index samples_p = 500;
  Index samples_q = 500;
  std::vector<std::string> class_names{"p", "q"};

  FeatureLayout layout() const { return FeatureLayout(dims); }
  /// Throws ConfigError for invalid parameters or a coupling graph with cycles.
  void validate() const;
};

SynthSpec synth_spec_from_json(const std::string& text);
std::string synth_spec_to_json(const SynthSpec& spec);

/// Class p rows first, then class q. Identical seeds give bit-identical data.
LabeledFeatures synth_fusion_generator(const SynthSpec& spec, std::uint64_t seed);

/// Exact joint pmf of variables (u, v) under class p (is_p) or q.
Eigen::MatrixXd synth_pair_pmf(const SynthSpec& spec, bool is_p, Index u, Index v);

}  // namespace fusegraph
