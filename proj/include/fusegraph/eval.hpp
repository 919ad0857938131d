#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fusegraph/fusion.hpp"

namespace fusegraph {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  Eigen::MatrixXi counts;
  std::vector<std::string> class_names;

  Index total() const { return counts.sum(); }
  double accuracy() const;
  /// Each nonempty row divided by its sum.
  Eigen::MatrixXd row_normalized() const;
};

ConfusionMatrix tally(Index classes, const std::vector<int>& truth, const std::vector<int>& predicted,
                      std::vector<std::string> class_names = {});

struct Evaluation {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
};

/// Classifies every test sample; test labels are matched to model classes by name.
Evaluation evaluate(const MulticlassModel& model, const LabeledFeatures& test);

/// Test labels expressed as model class indices; throws on unknown names.
std::vector<int> model_labels(const MulticlassModel& model, const LabeledFeatures& test);

struct RocPoint {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_d = 0.0;
};

/// Operating points ordered by increasing threshold; a sample is declared positive
/// when its score exceeds the threshold.
struct RocCurve {
  std::vector<RocPoint> points;
};

/// Thresholds at -inf, every midpoint between distinct scores and +inf.
RocCurve roc_sweep(const std::vector<double>& scores, const std::vector<bool>& truth);

/// Detection of inliers by max_k score >= tau_out, swept over tau_out.
RocCurve outlier_roc(const MulticlassModel& model, const FeatureSets& samples, const std::vector<bool>& inlier);

struct SweepPoint {
  Index size = 0;  // training samples per class
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<double> accuracies;  // one per seed
};

struct SweepResult {
  std::vector<SweepPoint> points;
  int seeds = 0;
};

inline constexpr int kDefaultSweepSeeds = 10;

/// For each size and seed, trains on a stratified random subset of `size` samples per
/// class and evaluates on `test`.
SweepResult training_size_sweep(const LabeledFeatures& train, const LabeledFeatures& test,
                                const std::vector<Index>& sizes, int seeds, const FusionConfig& config,
                                std::uint64_t seed = 0);

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& confusion);
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep);
std::string evaluation_report_json(const Evaluation& evaluation);

}  // namespace fusegraph
