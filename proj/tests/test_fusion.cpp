#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fusegraph/eval.hpp"
#include "fusegraph/fusion.hpp"
#include "fusegraph/serialization.hpp"
#include "fusegraph/synth.hpp"

using namespace fusegraph;

namespace {

SynthSpec spec(Index per_class) {
  SynthSpec s;
  s.samples_p = s.samples_q = per_class;
  return s;
}

std::vector<FeatureSets> synth_classes(Index per_class, std::uint64_t seed) {
  return split_by_class(synth_fusion_generator(spec(per_class), seed));
}

FusionConfig small_config(Margin margin = Margin::Sign) {
  FusionConfig c;
  c.bins = 4;
  c.boost.margin = margin;
  c.boost.t_max = 4;
  return c;
}

// Gaussian clouds around well-separated class means, split into sets of the given dims.
std::vector<FeatureSets> gaussian_classes(const std::vector<Index>& counts, const std::vector<Index>& dims,
                                          double separation, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<FeatureSets> out;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    FeatureSets sets;
    for (std::size_t s = 0; s < dims.size(); ++s) {
      Eigen::MatrixXd m(counts[k], dims[s]);
      for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) {
          const bool active = static_cast<std::size_t>((c + s) % counts.size()) == k;
          m(r, c) = normal(rng) + (active ? separation : 0.0);
        }
      sets.push_back(m);
    }
    out.push_back(sets);
  }
  return out;
}

}  // namespace

TEST(TrainBinary, SingleSetWithoutBoostingIsOneTreePair) {
  const auto classes = gaussian_classes({200, 200}, {5}, 1.0, 3);
  FusionConfig config = small_config();
  config.boost.t_max = 0;
  const auto model = train_binary(classes[0], classes[1], config);
  ASSERT_EQ(model.boosted.rounds.size(), 1u);
  // Rebuild the dataset and learn the pair directly.
  const Index n = 400;
  Eigen::MatrixXd pooled(n, 5);
  pooled << classes[0][0], classes[1][0];
  const auto symbols = model.quantizers[0].quantize_rows(pooled);
  Eigen::VectorXi labels(n);
  labels << Eigen::VectorXi::Ones(200), -Eigen::VectorXi::Ones(200);
  const auto ds = WeightedDataset::uniform(symbols, labels, model.quantizers[0].cell_counts());
  const auto nodes = model.layout.all_variables();
  const double alpha = config.boost.alpha / n;
  const auto pair = learn_discriminative_tree_pair(fit_empirical_model(ds, nodes, alpha, 1),
                                                   fit_empirical_model(ds, nodes, alpha, -1), nodes);
  EXPECT_EQ(model.boosted.rounds[0].pair.tree_p.edges(), pair.tree_p.edges());
  EXPECT_EQ(model.boosted.rounds[0].pair.tree_q.edges(), pair.tree_q.edges());
  for (Index i = 0; i < 50; ++i) {
    const double expected = model.boosted.rounds[0].beta * weak_llr(pair, symbols.row(i).transpose());
    EXPECT_NEAR(score(model, sample_row(classes[0], 0 + i)), expected, 1e-9);
  }
}

TEST(TrainBinary, SwappedClassesNegateDecisions) {
  const auto classes = synth_classes(300, 4);
  const auto test = synth_fusion_generator(spec(300), 99);
  for (Margin margin : {Margin::Sign, Margin::ClampedLlr}) {
    const auto config = small_config(margin);
    const auto ab = train_binary(classes[0], classes[1], config, "a", "b");
    const auto ba = train_binary(classes[1], classes[0], config, "b", "a");
    for (Index i = 0; i < test.samples(); ++i) {
      const auto x = sample_row(test.sets, i);
      const auto d1 = classify(ab, x);
      const auto d2 = classify(ba, x);
      if (margin == Margin::ClampedLlr) EXPECT_NEAR(d1.score, -d2.score, 1e-9);
      if (std::abs(d1.score) > 1e-9) {
        EXPECT_NE(d1.is_p, d2.is_p);
        EXPECT_EQ(d1.label, d2.label);
      }
    }
  }
}

TEST(Classify, HugeThresholdAlwaysGivesQ) {
  const auto classes = synth_classes(200, 5);
  auto model = train_binary(classes[0], classes[1], small_config(), "p", "q");
  model.set_tau(1e18);
  for (Index i = 0; i < 50; ++i) EXPECT_EQ(classify(model, sample_row(classes[0], i)).label, "q");
}

TEST(Classify, ZeroBetasScoreZeroAndPickQ) {
  const auto classes = synth_classes(200, 6);
  auto model = train_binary(classes[0], classes[1], small_config(), "p", "q");
  for (auto& r : model.boosted.rounds) r.beta = 0;
  const auto d = classify(model, sample_row(classes[0], 0));
  EXPECT_EQ(d.score, 0.0);
  EXPECT_FALSE(d.is_p);
  EXPECT_EQ(d.label, "q");
}

TEST(Classify, HandBuiltTwoNodeModel) {
  BinaryFusionModel model;
  model.layout = FeatureLayout({2});
  model.quantizers = {Quantizer({{0.5}, {0.5}}, 2)};
  const EmpiricalModel p({0, 1}, {Eigen::Vector2d(0.6, 0.4), Eigen::Vector2d(0.5, 0.5)},
                         {(Eigen::Matrix2d() << 0.4, 0.2, 0.1, 0.3).finished()});
  const EmpiricalModel q({0, 1}, {Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.5, 0.5)},
                         {(Eigen::Matrix2d() << 0.15, 0.15, 0.35, 0.35).finished()});
  const std::vector<Index> nodes{0, 1};
  BoostRound r;
  r.pair = {build_tree(p, nodes, {Edge(0, 1)}), build_tree(q, nodes, {}), 0, 0.0};
  r.beta = 1.5;
  model.boosted.layout = model.layout;
  model.boosted.rounds = {r};
  // x = (0.2, 0.9) -> symbols (0, 1): p = 0.2, q = 0.3 * 0.5.
  const Sample x{Eigen::Vector2d(0.2, 0.9)};
  EXPECT_NEAR(score(model, x), 1.5 * std::log(0.2 / 0.15), 1e-14);
  EXPECT_TRUE(classify(model, x).is_p);
  EXPECT_THROW(classify(model, Sample{Eigen::Vector3d(0, 0, 0)}), DataError);
  EXPECT_THROW(classify(model, Sample{Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)}), DataError);
}

TEST(TrainBinary, InputErrors) {
  const auto classes = synth_classes(20, 7);
  FeatureSets wrong = classes[1];
  wrong[0] = Eigen::MatrixXd::Zero(20, 3);
  EXPECT_THROW(train_binary(classes[0], wrong, small_config()), DataError);
  FeatureSets one = select_rows(classes[1], std::vector<Index>{0});
  EXPECT_THROW(train_binary(classes[0], one, small_config()), DataError);
}

TEST(Multiclass, TwoClassesAgreeWithBinaryModel) {
  const auto classes = synth_classes(300, 8);
  const auto test = synth_fusion_generator(spec(200), 77);
  for (Margin margin : {Margin::Sign, Margin::ClampedLlr}) {
    const auto config = small_config(margin);
    const auto multi = train_multiclass(classes, {"p", "q"}, config);
    const auto binary = train_binary(classes[0], classes[1], config);
    for (Index i = 0; i < test.samples(); ++i) {
      const auto x = sample_row(test.sets, i);
      const auto d = classify_multiclass(multi, x);
      EXPECT_EQ(d.scores.size(), 2);
      const double s = score(binary, x);
      if (std::abs(s) > 1e-9) EXPECT_EQ(d.class_index == 0, s > 0);
    }
  }
}

TEST(Multiclass, IdenticalSubmodelsTieToFirstClass) {
  const auto classes = synth_classes(100, 9);
  const auto binary = train_binary(classes[0], classes[1], small_config());
  MulticlassModel model;
  model.submodels = {binary, binary, binary};
  model.class_names = {"a", "b", "c"};
  const auto d = classify_multiclass(model, sample_row(classes[1], 0));
  EXPECT_EQ(d.class_index, 0);
  EXPECT_EQ(d.scores.size(), 3);
}

TEST(Multiclass, WellSeparatedThreeClassProblem) {
  const auto train = gaussian_classes({500, 500, 500}, {3, 3, 3}, 2.5, 10);
  const auto test = gaussian_classes({500, 500, 500}, {3, 3, 3}, 2.5, 11);
  const auto model = train_multiclass(train, {"a", "b", "c"}, FusionConfig{});
  const auto ev = evaluate(model, join_classes(test, {"a", "b", "c"}));
  EXPECT_GE(ev.accuracy, 0.9);
}

TEST(Multiclass, ThresholdShiftsDoNotChangeArgmax) {
  const auto train = gaussian_classes({200, 200, 200}, {2, 2}, 1.0, 12);
  auto model = train_multiclass(train, {"a", "b", "c"}, small_config());
  const auto test = join_classes(gaussian_classes({50, 50, 50}, {2, 2}, 1.0, 13), {"a", "b", "c"});
  const auto before = model_labels(model, test);
  for (auto& sub : model.submodels) sub.set_tau(sub.tau() + 3.7);
  EXPECT_EQ(model_labels(model, test), before);
}

TEST(Multiclass, ClassOrderOnlyPermutesSubmodels) {
  const auto train = gaussian_classes({150, 150, 150}, {2, 2}, 1.0, 14);
  const auto config = small_config();
  const auto abc = train_multiclass(train, {"a", "b", "c"}, config);
  const std::vector<FeatureSets> permuted{train[2], train[0], train[1]};
  const auto cab = train_multiclass(permuted, {"c", "a", "b"}, config);
  const std::vector<std::size_t> map{1, 2, 0};
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& x = abc.submodels[k];
    const auto& y = cab.submodels[map[k]];
    EXPECT_EQ(x.p_label, y.p_label);
    EXPECT_EQ(x.quantizers, y.quantizers);
    ASSERT_EQ(x.boosted.rounds.size(), y.boosted.rounds.size());
    for (std::size_t t = 0; t < x.boosted.rounds.size(); ++t) {
      EXPECT_EQ(x.boosted.rounds[t].pair.tree_p.edges(), y.boosted.rounds[t].pair.tree_p.edges());
      EXPECT_NEAR(x.boosted.rounds[t].beta, y.boosted.rounds[t].beta, 1e-12);
    }
  }
}

TEST(Multiclass, AddingClassLeavesExistingSubmodelsUntouched) {
  const auto train = gaussian_classes({120, 120, 120}, {2, 2}, 1.0, 15);
  const auto config = small_config();
  const std::vector<FeatureSets> first_two{train[0], train[1]};
  const auto model = train_multiclass(first_two, {"a", "b"}, config);
  const auto grown = add_class(model, first_two, train[2], "c", config);
  ASSERT_EQ(grown.classes(), 3);
  EXPECT_EQ(grown.class_names.back(), "c");
  for (std::size_t k = 0; k < 2; ++k)
    EXPECT_EQ(to_json_string(grown.submodels[k]), to_json_string(model.submodels[k]));
  EXPECT_THROW(add_class(model, std::vector<FeatureSets>{train[0]}, train[2], "c", config), DataError);
}

TEST(Multiclass, TenClassTrainingTableShape) {
  const std::vector<std::string> names{"BMP-2", "BTR-70", "T-72", "BTR-60", "2S1",
                                       "BRDM-2", "D7", "T62", "ZIL131", "ZSU234"};
  const std::vector<Index> counts{299, 697, 298, 256, 233, 299, 299, 691, 299, 299};
  const auto per_class = gaussian_classes(counts, {3, 3, 3}, 1.5, 16);
  const auto data = join_classes(per_class, names);
  EXPECT_EQ(data.samples(), 3670);
  const auto back = split_by_class(data);
  ASSERT_EQ(back.size(), 10u);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(sample_count(back[k]), counts[k]);
  FusionConfig config = small_config();
  config.boost.t_max = 1;
  const auto model = train_multiclass(back, names, config);
  EXPECT_EQ(model.classes(), 10);
  EXPECT_EQ(model.layout(), FeatureLayout({3, 3, 3}));
  EXPECT_EQ(classify_multiclass(model, sample_row(back[0], 0)).scores.size(), 10);
}

TEST(Multiclass, EmptyClassIsRejected) {
  const auto train = gaussian_classes({50, 50}, {2}, 1.0, 17);
  std::vector<FeatureSets> with_empty{train[0], {Eigen::MatrixXd(0, 2)}};
  EXPECT_THROW(train_multiclass(with_empty, {"a", "b"}, small_config()), DataError);
  EXPECT_THROW(train_multiclass(std::vector<FeatureSets>{train[0]}, {"a"}, small_config()), DataError);
}

TEST(Outlier, InfiniteThresholds) {
  const auto train = gaussian_classes({100, 100}, {2}, 1.0, 18);
  auto model = train_multiclass(train, {"a", "b"}, small_config());
  const auto x = sample_row(train[0], 0);
  model.tau_out = -std::numeric_limits<double>::infinity();
  EXPECT_FALSE(reject_outlier(model, x));
  model.tau_out = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(reject_outlier(model, x));
}

TEST(Outlier, RejectionSweepIsMonotone) {
  const auto train = gaussian_classes({200, 200}, {2, 2}, 2.0, 19);
  auto model = train_multiclass(train, {"a", "b"}, small_config());
  const auto inliers = gaussian_classes({100, 100}, {2, 2}, 2.0, 20);
  // Outliers sit far from both training clouds.
  auto outliers = gaussian_classes({200}, {2, 2}, 0.0, 21)[0];
  for (auto& m : outliers) m.array() -= 4.0;
  const std::vector<FeatureSets> parts{inliers[0], inliers[1], outliers};
  const auto pool = concat_rows(parts);
  std::vector<bool> inlier(400, false);
  std::fill(inlier.begin(), inlier.begin() + 200, true);
  const auto roc = outlier_roc(model, pool, inlier);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_LT(roc.points[i - 1].threshold, roc.points[i].threshold);
    EXPECT_LE(roc.points[i].p_d, roc.points[i - 1].p_d);
    EXPECT_LE(roc.points[i].p_fa, roc.points[i - 1].p_fa);
  }
  // Shifting tau_out moves rejection only.
  const auto labels = model_labels(model, join_classes(std::vector<FeatureSets>{pool}, {"a"}));
  model.tau_out = 1.0;
  EXPECT_EQ(model_labels(model, join_classes(std::vector<FeatureSets>{pool}, {"a"})), labels);
}
