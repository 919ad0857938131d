#include "fusegraph/fusion.hpp"

#include <future>
#include <string>

namespace fusegraph {

namespace {

FeatureLayout layout_of(const FeatureSets& sets) {
  std::vector<Index> dims;
  for (const auto& m : sets) dims.push_back(m.cols());
  return FeatureLayout(std::move(dims));
}

}  // namespace

BinaryFusionModel train_binary(const FeatureSets& features_p, const FeatureSets& features_q,
                               const FusionConfig& config, std::string p_label, std::string q_label) {
  if (features_p.empty() || features_p.size() != features_q.size())
    throw DataError("train: both classes need the same number of feature sets");
  const FeatureLayout layout = layout_of(features_p);
  check_layout(features_q, layout);
  const Index np = sample_count(features_p);
  const Index nq = sample_count(features_q);
  if (np < 2 || nq < 2) throw DataError("train: each class needs at least two samples");

  BinaryFusionModel model;
  model.layout = layout;
  model.p_label = std::move(p_label);
  model.q_label = std::move(q_label);

  const Index n = np + nq;
  SymbolMatrix symbols(n, layout.total());
  std::vector<int> cells;
  for (Index set = 0; set < layout.sets(); ++set) {
    const auto s = static_cast<std::size_t>(set);
    Eigen::MatrixXd pooled(n, layout.dim(set));
    pooled << features_p[s], features_q[s];
    model.quantizers.push_back(Quantizer::fit(pooled, config.bins));
    symbols.middleCols(layout.offset(set), layout.dim(set)) = model.quantizers.back().quantize_rows(pooled);
    const auto c = model.quantizers.back().cell_counts();
    cells.insert(cells.end(), c.begin(), c.end());
  }

  Eigen::VectorXi labels(n);
  labels.head(np).setConstant(1);
  labels.tail(nq).setConstant(-1);
  WeightedDataset ds = WeightedDataset::uniform(std::move(symbols), std::move(labels), std::move(cells));
  if (config.rebalance) {
    ds.weights.head(np).setConstant(0.5 / static_cast<double>(np));
    ds.weights.tail(nq).setConstant(0.5 / static_cast<double>(nq));
  }

  model.boosted = thicken(ds, layout, config.boost);
  model.boosted.tau = config.tau;
  return model;
}

Eigen::VectorXi quantize_sample(const BinaryFusionModel& model, const Sample& sample) {
  if (static_cast<Index>(sample.size()) != model.layout.sets())
    throw DataError("classify: expected " + std::to_string(model.layout.sets()) + " feature vectors, got " +
                    std::to_string(sample.size()));
  Eigen::VectorXi symbols(model.layout.total());
  for (Index set = 0; set < model.layout.sets(); ++set) {
    const auto s = static_cast<std::size_t>(set);
    symbols.segment(model.layout.offset(set), model.layout.dim(set)) = model.quantizers[s].quantize(sample[s]);
  }
  return symbols;
}

double score(const BinaryFusionModel& model, const Sample& sample) {
  return strong_llr(model.boosted, quantize_sample(model, sample));
}

BinaryDecision classify(const BinaryFusionModel& model, const Sample& sample) {
  BinaryDecision d;
  d.score = score(model, sample);
  d.is_p = d.score > model.tau();
  d.label = d.is_p ? model.p_label : model.q_label;
  return d;
}

namespace {

BinaryFusionModel train_one_vs_all(std::span<const FeatureSets> per_class, std::size_t k,
                                   const std::vector<std::string>& names, const FusionConfig& config) {
  std::vector<FeatureSets> rest;
  for (std::size_t other = 0; other < per_class.size(); ++other)
    if (other != k) rest.push_back(per_class[other]);
  return train_binary(per_class[k], concat_rows(rest), config, names[k], "not " + names[k]);
}

}  // namespace

MulticlassModel train_multiclass(std::span<const FeatureSets> per_class, std::vector<std::string> class_names,
                                 const FusionConfig& config) {
  if (per_class.size() < 2) throw DataError("train: at least two classes are required");
  if (class_names.size() != per_class.size()) throw ConfigError("train: class name count mismatch");
  for (std::size_t k = 0; k < per_class.size(); ++k)
    if (per_class[k].empty() || sample_count(per_class[k]) == 0)
      throw DataError("train: class '" + class_names[k] + "' has no samples");

  std::vector<std::future<BinaryFusionModel>> jobs;
  for (std::size_t k = 0; k < per_class.size(); ++k)
    jobs.push_back(std::async(std::launch::async, train_one_vs_all, per_class, k, std::cref(class_names),
                              std::cref(config)));
  MulticlassModel model;
  for (auto& job : jobs) model.submodels.push_back(job.get());
  model.class_names = std::move(class_names);
  return model;
}

MulticlassModel add_class(const MulticlassModel& model, std::span<const FeatureSets> existing_per_class,
                          const FeatureSets& new_class, std::string name, const FusionConfig& config) {
  if (static_cast<Index>(existing_per_class.size()) != model.classes())
    throw DataError("add_class: training data does not match existing classes");
  MulticlassModel out = model;
  out.submodels.push_back(train_binary(new_class, concat_rows(existing_per_class), config, name, "not " + name));
  out.class_names.push_back(std::move(name));
  return out;
}

MulticlassDecision classify_multiclass(const MulticlassModel& model, const Sample& sample) {
  if (model.submodels.empty()) throw ConfigError("classify: model has no classes");
  MulticlassDecision d;
  d.scores.resize(model.classes());
  for (Index k = 0; k < model.classes(); ++k) d.scores(k) = score(model.submodels[static_cast<std::size_t>(k)], sample);
  for (Index k = 1; k < model.classes(); ++k)
    if (d.scores(k) > d.scores(d.class_index)) d.class_index = k;
  return d;
}

bool reject_outlier(const MulticlassModel& model, const Sample& sample) {
  return classify_multiclass(model, sample).scores.maxCoeff() < model.tau_out;
}

}  // namespace fusegraph
