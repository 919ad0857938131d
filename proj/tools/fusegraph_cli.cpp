// Command-line front end: train, predict, eval, roc, sweep, extract-features, synth.

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "fusegraph/eval.hpp"
#include "fusegraph/features.hpp"
#include "fusegraph/serialization.hpp"
#include "fusegraph/synth.hpp"

namespace fg = fusegraph;

namespace {

constexpr int kExitDataError = 2;
constexpr int kExitConfigError = 3;

struct DataOptions {
  std::string path;
  std::string layout;
  std::string label_column = "label";
  std::string wavelet = "haar";
  int levels = 2;
};

struct TrainOptions {
  int bins = 8;
  int tmax = 10;
  double alpha = 1.0;
  double j_tol = 1e-3;
  bool allow_forest = false;
  std::string margin = "sign";
  double llr_clamp = 10.0;
  bool resample = false;
  bool rebalance = false;
  double tau = 0.0;
  std::uint64_t seed = 0;
};

std::vector<fg::Index> parse_list(const std::string& text, const char* what) {
  std::vector<fg::Index> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<fg::Index>(v));
    } catch (const std::exception&) {
      throw fg::ConfigError(std::string("invalid ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw fg::ConfigError(std::string("empty ") + what);
  return out;
}

void add_data_options(CLI::App* cmd, DataOptions& data, bool with_layout) {
  cmd->add_option("--data", data.path, "Feature CSV or image manifest (path,label)")->required();
  if (with_layout) cmd->add_option("--layout", data.layout, "Feature-set sizes m1,m2,... (CSV input)");
  cmd->add_option("--label-column", data.label_column, "Label column name in feature CSVs");
  cmd->add_option("--wavelet", data.wavelet, "Wavelet for image manifests: haar or bior2.2");
  cmd->add_option("--levels", data.levels, "Wavelet decomposition levels for image manifests");
}

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  cmd->add_option("--bins", t.bins, "Quantile bins per feature");
  cmd->add_option("--tmax", t.tmax, "Maximum boosting rounds after the initial forest");
  cmd->add_option("--alpha", t.alpha, "Smoothing pseudocount per class");
  cmd->add_option("--j-tol", t.j_tol, "Relative J-divergence change that stops boosting");
  cmd->add_flag("--allow-forest", t.allow_forest, "Prune non-positive discriminative edges");
  cmd->add_option("--margin", t.margin, "Weight-update margin: sign or llr")->check(CLI::IsMember({"sign", "llr"}));
  cmd->add_option("--llr-clamp", t.llr_clamp, "Clamp for weak log-likelihood ratios (nats)");
  cmd->add_flag("--resample", t.resample, "Fit rounds on weighted bootstrap samples");
  cmd->add_flag("--rebalance", t.rebalance, "Give p and complement equal total weight");
  cmd->add_option("--tau", t.tau, "Binary decision threshold stored in each submodel");
  cmd->add_option("--seed", t.seed, "Seed for every random choice");
}

fg::FusionConfig fusion_config(const TrainOptions& t) {
  fg::FusionConfig c;
  c.bins = t.bins;
  c.tau = t.tau;
  c.rebalance = t.rebalance;
  c.boost.t_max = t.tmax;
  c.boost.alpha = t.alpha;
  c.boost.j_tol = t.j_tol;
  c.boost.allow_forest = t.allow_forest;
  c.boost.margin = t.margin == "llr" ? fg::Margin::ClampedLlr : fg::Margin::Sign;
  c.boost.llr_clamp = t.llr_clamp;
  c.boost.resample = t.resample;
  c.boost.seed = t.seed;
  return c;
}

fg::LabeledFeatures load_data(const DataOptions& data, const std::optional<fg::FeatureLayout>& layout,
                              const std::optional<std::vector<std::string>>& known = std::nullopt) {
  if (fg::is_image_manifest(data.path)) {
    auto features = fg::extract_features(fg::read_manifest(data.path), data.levels, fg::parse_wavelet(data.wavelet), known);
    if (layout && !(features.layout() == *layout))
      throw fg::ConfigError("image features do not match the requested layout");
    return features;
  }
  fg::TabularOptions options;
  options.label_column = data.label_column;
  options.known_classes = known;
  if (layout) return fg::load_tabular_features(data.path, *layout, options);
  return fg::load_tabular_features(data.path, options);
}

std::optional<fg::FeatureLayout> layout_option(const std::string& text) {
  if (text.empty()) return std::nullopt;
  return fg::FeatureLayout(parse_list(text, "layout"));
}

// Shortest text that reads back to the same double.
std::string format_number(double x) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, x).ptr;
  return std::string(buf, end);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discriminative tree-graph feature fusion classifier"};
  app.require_subcommand(1);

  DataOptions data;
  TrainOptions train_opts;
  std::string model_path, out_path, report_path, confusion_path, positive, test_path, sizes_text = "50,100,200,400";
  std::string images_path, spec_path;
  double tau_out = -std::numeric_limits<double>::infinity();
  double tau_override = std::numeric_limits<double>::quiet_NaN();
  int seeds = fg::kDefaultSweepSeeds;
  double holdout = 0.3;

  auto* train = app.add_subcommand("train", "Train a one-versus-all fusion model");
  add_data_options(train, data, true);
  add_train_options(train, train_opts);
  train->add_option("--tau-out", tau_out, "Outlier rejection threshold");
  train->add_option("--out", out_path, "Model JSON output")->required();

  auto* predict = app.add_subcommand("predict", "Classify samples with a trained model");
  predict->add_option("--model", model_path, "Model JSON")->required();
  add_data_options(predict, data, false);
  predict->add_option("--tau", tau_override, "Override the per-class binary threshold");
  predict->add_option("--tau-out", tau_out, "Override the outlier rejection threshold");
  predict->add_option("--out", out_path, "Predictions CSV")->required();

  auto* eval = app.add_subcommand("eval", "Confusion matrix and accuracy on labeled data");
  eval->add_option("--model", model_path, "Model JSON")->required();
  add_data_options(eval, data, false);
  eval->add_option("--report", report_path, "JSON report output");
  eval->add_option("--confusion", confusion_path, "Confusion matrix CSV output");

  auto* roc = app.add_subcommand("roc", "One-versus-all ROC curve for a class");
  roc->add_option("--model", model_path, "Model JSON")->required();
  add_data_options(roc, data, false);
  roc->add_option("--positive", positive, "Positive class name")->required();
  roc->add_option("--out", out_path, "ROC CSV output")->required();

  auto* sweep = app.add_subcommand("sweep", "Accuracy as a function of training size");
  add_data_options(sweep, data, true);
  add_train_options(sweep, train_opts);
  sweep->add_option("--test", test_path, "Held-out evaluation data (default: stratified holdout of --data)");
  sweep->add_option("--holdout", holdout, "Holdout fraction when --test is absent")->check(CLI::Range(0.05, 0.95));
  sweep->add_option("--sizes", sizes_text, "Training samples per class, comma separated");
  sweep->add_option("--seeds", seeds, "Random subsets per size");
  sweep->add_option("--out", out_path, "Sweep CSV output")->required();

  auto* extract = app.add_subcommand("extract-features", "Wavelet LL/LH/HL features from an image manifest");
  extract->add_option("--images", images_path, "Image manifest CSV (path,label)")->required();
  extract->add_option("--wavelet", data.wavelet, "haar or bior2.2");
  extract->add_option("--levels", data.levels, "Decomposition levels");
  extract->add_option("--out", out_path, "Feature CSV output")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic fusion dataset");
  synth->add_option("--spec", spec_path, "Generator spec JSON (built-in defaults when omitted)");
  synth->add_option("--seed", train_opts.seed, "Random seed");
  synth->add_option("--out", out_path, "Feature CSV output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*train) {
      const auto input = load_data(data, layout_option(data.layout));
      auto model = fg::train_multiclass(fg::split_by_class(input), input.class_names, fusion_config(train_opts));
      model.tau_out = tau_out;
      fg::save_model(model, out_path);
      std::cout << "trained " << model.classes() << " one-versus-all models over " << input.samples()
                << " samples\n";
      for (const auto& sub : model.submodels)
        std::cout << "  " << sub.p_label << ": " << sub.boosted.rounds.size() << " rounds\n";
    } else if (*predict) {
      auto model = fg::load_model(model_path);
      if (!std::isnan(tau_override))
        for (auto& sub : model.submodels) sub.set_tau(tau_override);
      if (predict->count("--tau-out")) model.tau_out = tau_out;
      const auto input = load_data(data, model.layout());
      fg::check_layout(input.sets, model.layout());
      std::ofstream out(out_path);
      if (!out) throw fg::DataError("cannot write " + out_path);
      out << std::setprecision(17) << "row,predicted,outlier";
      for (const auto& name : model.class_names) out << ",score_" << name;
      for (const auto& name : model.class_names) out << ",is_" << name;
      out << '\n';
      for (fg::Index r = 0; r < input.samples(); ++r) {
        const auto sample = fg::sample_row(input.sets, r);
        const auto d = fg::classify_multiclass(model, sample);
        out << r << ',' << model.class_names[static_cast<std::size_t>(d.class_index)] << ','
            << (d.scores.maxCoeff() < model.tau_out ? 1 : 0);
        for (fg::Index k = 0; k < d.scores.size(); ++k) out << ',' << d.scores(k);
        for (fg::Index k = 0; k < d.scores.size(); ++k)
          out << ',' << (d.scores(k) > model.submodels[static_cast<std::size_t>(k)].tau() ? 1 : 0);
        out << '\n';
      }
    } else if (*eval) {
      const auto model = fg::load_model(model_path);
      const auto input = load_data(data, model.layout());
      const auto result = fg::evaluate(model, input);
      std::cout << "accuracy " << format_number(result.accuracy) << " on " << result.confusion.total() << " samples\n";
      if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw fg::DataError("cannot write " + report_path);
        out << fg::evaluation_report_json(result) << '\n';
      }
      if (!confusion_path.empty()) fg::write_confusion_csv(confusion_path, result.confusion);
    } else if (*roc) {
      const auto model = fg::load_model(model_path);
      const auto it = std::find(model.class_names.begin(), model.class_names.end(), positive);
      if (it == model.class_names.end()) throw fg::ConfigError("unknown positive class '" + positive + "'");
      const auto k = static_cast<std::size_t>(it - model.class_names.begin());
      const auto input = load_data(data, model.layout());
      const auto labels = fg::model_labels(model, input);
      std::vector<double> scores;
      std::vector<bool> truth;
      for (fg::Index r = 0; r < input.samples(); ++r) {
        scores.push_back(fg::score(model.submodels[k], fg::sample_row(input.sets, r)));
        truth.push_back(labels[static_cast<std::size_t>(r)] == static_cast<int>(k));
      }
      fg::write_roc_csv(out_path, fg::roc_sweep(scores, truth));
    } else if (*sweep) {
      auto full = load_data(data, layout_option(data.layout));
      fg::LabeledFeatures train_set, test_set;
      if (!test_path.empty()) {
        train_set = std::move(full);
        DataOptions test_data = data;
        test_data.path = test_path;
        test_set = load_data(test_data, train_set.layout(), train_set.class_names);
      } else {
        // Stratified holdout, seeded.
        std::mt19937_64 rng(train_opts.seed ^ 0x5eedULL);
        std::vector<fg::Index> train_rows, test_rows;
        for (int k = 0; k < static_cast<int>(full.class_names.size()); ++k) {
          std::vector<fg::Index> rows;
          for (std::size_t r = 0; r < full.labels.size(); ++r)
            if (full.labels[r] == k) rows.push_back(static_cast<fg::Index>(r));
          for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
          const auto n_test = static_cast<std::size_t>(std::llround(holdout * static_cast<double>(rows.size())));
          test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
          train_rows.insert(train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
        }
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(test_rows.begin(), test_rows.end());
        auto subset = [&](const std::vector<fg::Index>& rows) {
          fg::LabeledFeatures s;
          s.sets = fg::select_rows(full.sets, rows);
          s.class_names = full.class_names;
          for (fg::Index r : rows) s.labels.push_back(full.labels[static_cast<std::size_t>(r)]);
          return s;
        };
        train_set = subset(train_rows);
        test_set = subset(test_rows);
      }
      const auto result = fg::training_size_sweep(train_set, test_set, parse_list(sizes_text, "sizes"), seeds,
                                                  fusion_config(train_opts), train_opts.seed);
      fg::write_sweep_csv(out_path, result);
      for (const auto& p : result.points)
        std::cout << p.size << '\t' << format_number(p.mean_accuracy) << '\t' << format_number(p.std_accuracy) << '\n';
    } else if (*extract) {
      const auto features =
          fg::extract_features(fg::read_manifest(images_path), data.levels, fg::parse_wavelet(data.wavelet));
      fg::write_tabular_features(out_path, features);
      std::cout << "extracted " << features.samples() << " samples, layout";
      for (const auto& m : features.sets) std::cout << ' ' << m.cols();
      std::cout << '\n';
    } else if (*synth) {
      fg::SynthSpec spec;
      if (!spec_path.empty()) {
        std::ifstream in(spec_path);
        if (!in) throw fg::ConfigError("cannot read spec " + spec_path);
        std::stringstream buf;
        buf << in.rdbuf();
        spec = fg::synth_spec_from_json(buf.str());
      }
      fg::write_tabular_features(out_path, fg::synth_fusion_generator(spec, train_opts.seed));
    }
  } catch (const fg::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitDataError;
  } catch (const fg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
