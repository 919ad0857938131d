#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>

#include "fusegraph/layout.hpp"
#include "fusegraph/tree_learning.hpp"

namespace fusegraph {

/// Margin used in the sample-weight update.
enum class Margin {
  Sign,        // exp(-beta y sign(h))
  ClampedLlr,  // exp(-beta y h), h clamped to +-llr_clamp
};

struct BoostConfig {
  int t_max = 10;
  double j_tol = 1e-3;
  /// Pseudocount per class, in units of one average-weight sample.
  double alpha = 1.0;
  bool allow_forest = false;
  Margin margin = Margin::Sign;
  double llr_clamp = 10.0;
  /// Fit each round on a weighted bootstrap of the data instead of the weights.
  bool resample = false;
  std::uint64_t seed = 0;
};

inline constexpr double kEpsilonFloor = 1e-6;

struct BoostRound {
  TreePair pair;
  double epsilon = 0.5;
  double beta = 0.0;
  double z_norm = 1.0;
  double j_divergence = 0.0;
};

struct BoostedModel {
  std::vector<BoostRound> rounds;  // rounds[0] is the disjoint forest pair
  FeatureLayout layout;
  double tau = 0.0;
  double llr_clamp = 10.0;
};

/// 0.5 ln((1 - eps) / eps).
inline double beta_from_epsilon(double epsilon) { return 0.5 * std::log((1.0 - epsilon) / epsilon); }

/// Hard decision of a score; ties go to class q (-1).
inline int sign_decision(double score) { return score > 0 ? 1 : -1; }

/// Clamped log-likelihood ratio of one tree pair.
double weak_llr(const TreePair& pair, const Eigen::Ref<const Eigen::VectorXi>& sample, double clamp = 10.0,
                std::size_t* lookups = nullptr);

/// Weighted error of hard decisions, clamped to [1e-6, 1 - 1e-6].
double weighted_error(const Eigen::VectorXd& weights, const Eigen::VectorXi& labels, const Eigen::VectorXd& h);

struct Reweighting {
  Eigen::VectorXd weights;
  double z_norm = 1.0;
};

/// D_{t+1}(i) = D_t(i) exp(-beta y_i m(h_i)) / Z_t.
Reweighting reweight(const Eigen::VectorXd& weights, const Eigen::VectorXi& labels, const Eigen::VectorXd& h,
                     double beta, Margin margin);

struct RoundOutcome {
  BoostRound round;
  Eigen::VectorXd next_weights;
};

/// Scores a learned pair on the data and builds the round. Returns nullopt when the
/// weighted error reaches 0.5.
std::optional<RoundOutcome> complete_round(const WeightedDataset& ds, TreePair pair, const BoostConfig& config);

/// One boosting round over every variable. Returns nullopt when the weak learner is no
/// better than chance.
std::optional<RoundOutcome> boost_round(const WeightedDataset& ds, int t, const BoostConfig& config);

/// Round 0 (per-set pairs concatenated into a disjoint forest) followed by boosting.
BoostedModel thicken(const WeightedDataset& ds, const FeatureLayout& layout, const BoostConfig& config);

/// sum_t beta_t h_t(x).
double strong_llr(const BoostedModel& model, const Eigen::Ref<const Eigen::VectorXi>& sample,
                  std::size_t* lookups = nullptr);

inline bool decide_p(const BoostedModel& model, const Eigen::Ref<const Eigen::VectorXi>& sample) {
  return strong_llr(model, sample) > model.tau;
}

struct EdgeUnion {
  std::set<Edge> p;
  std::set<Edge> q;
};

/// Union of edge sets over rounds 0..last_round (all rounds when negative).
EdgeUnion edge_union(const BoostedModel& model, int last_round = -1);

/// Number of node and edge table lookups strong_llr performs on `sample`.
std::size_t factor_evaluation_count(const BoostedModel& model, const Eigen::Ref<const Eigen::VectorXi>& sample);

}  // namespace fusegraph
