#include "fusegraph/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>

#include "json.hpp"

namespace fusegraph {

double ConfusionMatrix::accuracy() const {
  const Index n = total();
  return n == 0 ? 0.0 : static_cast<double>(counts.trace()) / static_cast<double>(n);
}

Eigen::MatrixXd ConfusionMatrix::row_normalized() const {
  Eigen::MatrixXd out = counts.cast<double>();
  for (Index r = 0; r < out.rows(); ++r) {
    const double s = out.row(r).sum();
    if (s > 0) out.row(r) /= s;
  }
  return out;
}

ConfusionMatrix tally(Index classes, const std::vector<int>& truth, const std::vector<int>& predicted,
                      std::vector<std::string> class_names) {
  if (truth.size() != predicted.size()) throw DataError("tally: prediction count mismatch");
  ConfusionMatrix cm;
  cm.counts = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes)
      throw DataError("tally: class index out of range");
    ++cm.counts(truth[i], predicted[i]);
  }
  if (class_names.empty())
    for (Index k = 0; k < classes; ++k) class_names.push_back(std::to_string(k));
  cm.class_names = std::move(class_names);
  return cm;
}

std::vector<int> model_labels(const MulticlassModel& model, const LabeledFeatures& test) {
  std::vector<int> remap;
  for (const auto& name : test.class_names) {
    const auto it = std::find(model.class_names.begin(), model.class_names.end(), name);
    remap.push_back(it == model.class_names.end() ? -1 : static_cast<int>(it - model.class_names.begin()));
  }
  std::vector<int> out;
  out.reserve(test.labels.size());
  for (int label : test.labels) {
    const int k = remap.at(static_cast<std::size_t>(label));
    if (k < 0) throw DataError("evaluate: unknown label '" + test.class_names[static_cast<std::size_t>(label)] + "'");
    out.push_back(k);
  }
  return out;
}

Evaluation evaluate(const MulticlassModel& model, const LabeledFeatures& test) {
  check_layout(test.sets, model.layout());
  const auto truth = model_labels(model, test);
  std::vector<int> predicted(truth.size());
  for (Index r = 0; r < test.samples(); ++r)
    predicted[static_cast<std::size_t>(r)] =
        static_cast<int>(classify_multiclass(model, sample_row(test.sets, r)).class_index);
  Evaluation e;
  e.confusion = tally(model.classes(), truth, predicted, model.class_names);
  e.accuracy = e.confusion.accuracy();
  return e;
}

RocCurve roc_sweep(const std::vector<double>& scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size()) throw DataError("roc: score and truth lengths differ");
  const auto positives = static_cast<double>(std::count(truth.begin(), truth.end(), true));
  const auto negatives = static_cast<double>(truth.size()) - positives;
  if (positives == 0 || negatives == 0) throw DataError("roc: truth must contain both classes");
  for (double s : scores)
    if (std::isnan(s)) throw DataError("roc: NaN score");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  constexpr double inf = std::numeric_limits<double>::infinity();
  RocCurve roc;
  roc.points.push_back({-inf, 1.0, 1.0});
  // Walking up the sorted scores, every sample at or below the threshold is negative.
  double hits = positives;
  double false_alarms = negatives;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (truth[order[j]] ? hits : false_alarms) -= 1.0;
      ++j;
    }
    const double threshold = j < order.size() ? 0.5 * (scores[order[i]] + scores[order[j]]) : inf;
    roc.points.push_back({threshold, false_alarms / negatives, hits / positives});
    i = j;
  }
  return roc;
}

RocCurve outlier_roc(const MulticlassModel& model, const FeatureSets& samples, const std::vector<bool>& inlier) {
  std::vector<double> best;
  const Index n = sample_count(samples);
  for (Index r = 0; r < n; ++r) best.push_back(classify_multiclass(model, sample_row(samples, r)).scores.maxCoeff());
  return roc_sweep(best, inlier);
}

SweepResult training_size_sweep(const LabeledFeatures& train, const LabeledFeatures& test,
                                const std::vector<Index>& sizes, int seeds, const FusionConfig& config,
                                std::uint64_t seed) {
  if (seeds < 1) throw ConfigError("sweep: seed count must be at least 1");
  if (sizes.empty()) throw ConfigError("sweep: no training sizes");
  std::vector<std::vector<Index>> by_class(train.class_names.size());
  for (std::size_t r = 0; r < train.labels.size(); ++r)
    by_class.at(static_cast<std::size_t>(train.labels[r])).push_back(static_cast<Index>(r));
  for (Index size : sizes) {
    if (size < 2) throw ConfigError("sweep: training size must be at least 2");
    for (std::size_t k = 0; k < by_class.size(); ++k)
      if (size > static_cast<Index>(by_class[k].size()))
        throw ConfigError("sweep: size " + std::to_string(size) + " exceeds the " +
                          std::to_string(by_class[k].size()) + " samples of class '" + train.class_names[k] + "'");
  }

  auto cell = [&](std::size_t size_index, int seed_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(size_index), static_cast<std::uint32_t>(seed_index)};
    std::mt19937_64 rng(seq);
    std::vector<FeatureSets> per_class;
    for (const auto& rows : by_class) {
      std::vector<Index> pick = rows;
      // Partial Fisher-Yates with an explicit draw so the subset is library independent.
      const auto size = static_cast<std::size_t>(sizes[size_index]);
      for (std::size_t i = 0; i < size; ++i) {
        const auto j = i + static_cast<std::size_t>(rng() % (pick.size() - i));
        std::swap(pick[i], pick[j]);
      }
      pick.resize(size);
      std::sort(pick.begin(), pick.end());
      per_class.push_back(select_rows(train.sets, pick));
    }
    const auto model = train_multiclass(per_class, train.class_names, config);
    return evaluate(model, test).accuracy;
  };

  std::vector<std::vector<std::future<double>>> jobs(sizes.size());
  for (std::size_t s = 0; s < sizes.size(); ++s)
    for (int k = 0; k < seeds; ++k) jobs[s].push_back(std::async(std::launch::async, cell, s, k));

  SweepResult result;
  result.seeds = seeds;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    SweepPoint point;
    point.size = sizes[s];
    for (auto& job : jobs[s]) point.accuracies.push_back(job.get());
    const double n = static_cast<double>(point.accuracies.size());
    point.mean_accuracy = std::accumulate(point.accuracies.begin(), point.accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : point.accuracies) ss += (a - point.mean_accuracy) * (a - point.mean_accuracy);
    point.std_accuracy = point.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    result.points.push_back(std::move(point));
  }
  return result;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& confusion) {
  auto out = open_output(path);
  out << "true\\predicted";
  for (const auto& name : confusion.class_names) out << ',' << name;
  out << '\n';
  for (Index r = 0; r < confusion.counts.rows(); ++r) {
    out << confusion.class_names[static_cast<std::size_t>(r)];
    for (Index c = 0; c < confusion.counts.cols(); ++c) out << ',' << confusion.counts(r, c);
    out << '\n';
  }
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
  auto out = open_output(path);
  out << "threshold,p_fa,p_d\n";
  for (const auto& p : roc.points) out << p.threshold << ',' << p.p_fa << ',' << p.p_d << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& sweep) {
  auto out = open_output(path);
  out << "size,mean_accuracy,std_accuracy,seeds\n";
  for (const auto& p : sweep.points)
    out << p.size << ',' << p.mean_accuracy << ',' << p.std_accuracy << ',' << sweep.seeds << '\n';
}

std::string evaluation_report_json(const Evaluation& evaluation) {
  using nlohmann::json;
  const auto& cm = evaluation.confusion;
  json counts = json::array();
  json rates = json::array();
  const Eigen::MatrixXd normalized = cm.row_normalized();
  for (Index r = 0; r < cm.counts.rows(); ++r) {
    json row = json::array();
    json rate = json::array();
    for (Index c = 0; c < cm.counts.cols(); ++c) {
      row.push_back(cm.counts(r, c));
      rate.push_back(normalized(r, c));
    }
    counts.push_back(row);
    rates.push_back(rate);
  }
  json per_class = json::object();
  for (Index r = 0; r < cm.counts.rows(); ++r)
    per_class[cm.class_names[static_cast<std::size_t>(r)]] = normalized(r, r);
  return json{{"accuracy", evaluation.accuracy},
              {"samples", cm.total()},
              {"class_names", cm.class_names},
              {"confusion", counts},
              {"confusion_rates", rates},
              {"per_class_accuracy", per_class}}
      .dump(2);
}

}  // namespace fusegraph
