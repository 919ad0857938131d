#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fusegraph/boosting.hpp"
#include "fusegraph/dataset.hpp"

namespace fusegraph {

struct FusionConfig {
  int bins = 8;
  BoostConfig boost;
  double tau = 0.0;
  /// Give both classes equal total mass instead of their sample proportions.
  bool rebalance = false;
};

/// Binary p-versus-q classifier over M quantized feature sets.
struct BinaryFusionModel {
  FeatureLayout layout;
  std::vector<Quantizer> quantizers;  // one per feature set
  BoostedModel boosted;
  std::string p_label = "p";
  std::string q_label = "q";

  double tau() const { return boosted.tau; }
  void set_tau(double tau) { boosted.tau = tau; }
};

struct BinaryDecision {
  bool is_p = false;
  std::string label;
  double score = 0.0;
};

BinaryFusionModel train_binary(const FeatureSets& features_p, const FeatureSets& features_q,
                               const FusionConfig& config, std::string p_label = "p", std::string q_label = "q");

/// Concatenated symbol vector of a sample.
Eigen::VectorXi quantize_sample(const BinaryFusionModel& model, const Sample& sample);

double score(const BinaryFusionModel& model, const Sample& sample);

/// p-label iff score > tau.
BinaryDecision classify(const BinaryFusionModel& model, const Sample& sample);

/// K one-versus-all binary models plus an outlier threshold.
struct MulticlassModel {
  std::vector<BinaryFusionModel> submodels;
  std::vector<std::string> class_names;
  double tau_out = -std::numeric_limits<double>::infinity();

  Index classes() const { return static_cast<Index>(submodels.size()); }
  FeatureLayout layout() const { return submodels.empty() ? FeatureLayout{} : submodels.front().layout; }
};

/// Trains class k against the pooled remaining classes for every k.
MulticlassModel train_multiclass(std::span<const FeatureSets> per_class, std::vector<std::string> class_names,
                                 const FusionConfig& config);

/// Adds one class by training only its own one-versus-all model against the existing
/// classes; the existing submodels are copied unchanged.
MulticlassModel add_class(const MulticlassModel& model, std::span<const FeatureSets> existing_per_class,
                          const FeatureSets& new_class, std::string name, const FusionConfig& config);

struct MulticlassDecision {
  Index class_index = 0;
  Eigen::VectorXd scores;
};

/// argmax_k of the submodel scores; ties go to the lowest index.
MulticlassDecision classify_multiclass(const MulticlassModel& model, const Sample& sample);

/// True iff every submodel score is below tau_out.
bool reject_outlier(const MulticlassModel& model, const Sample& sample);

}  // namespace fusegraph
