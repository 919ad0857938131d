#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "fusegraph/boosting.hpp"
#include "oracles.hpp"

using namespace fusegraph;
using fusegraph::testing::quantized_synth;

namespace {

TreeGraph single_node(const Eigen::VectorXd& pmf, char dist = 'p') {
  return TreeGraph({0}, {pmf.array().log().matrix()}, {}, {}, {TreeKind::Discriminative, dist, 0});
}

TreePair one_node_pair(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return {single_node(p, 'p'), single_node(q, 'q'), 0, 0.0};
}

BoostedModel rounds_model(std::vector<std::pair<TreePair, double>> rounds, Index nodes = 1) {
  BoostedModel m;
  m.layout = FeatureLayout({nodes});
  for (auto& [pair, beta] : rounds) {
    BoostRound r;
    r.pair = pair;
    r.beta = beta;
    m.rounds.push_back(r);
  }
  return m;
}

SynthSpec small_spec() {
  SynthSpec s;
  s.samples_p = s.samples_q = 300;
  return s;
}

}  // namespace

TEST(WeakLlr, IdenticalTreesGiveZero) {
  const Eigen::Vector3d p(0.2, 0.3, 0.5);
  const auto pair = one_node_pair(p, p);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(weak_llr(pair, Eigen::VectorXi::Constant(1, s)), 0.0);
}

TEST(WeakLlr, SingleNodeClosedForm) {
  const auto pair = one_node_pair(Eigen::Vector2d(0.9, 0.1), Eigen::Vector2d(0.1, 0.9));
  EXPECT_NEAR(weak_llr(pair, Eigen::VectorXi::Constant(1, 0)), 2.197225, 1e-6);
  EXPECT_NEAR(weak_llr(pair, Eigen::VectorXi::Constant(1, 1)), -std::log(9.0), 1e-14);
}

TEST(WeakLlr, ClampsLargeDifferences) {
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 1.0);
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, std::exp(-25.0));
  const TreePair pair{single_node(p), TreeGraph({0}, {q.array().log().matrix()}, {}, {}), 0, 0.0};
  EXPECT_DOUBLE_EQ(weak_llr(pair, Eigen::VectorXi::Zero(1)), 10.0);
  const TreePair flipped{pair.tree_q, pair.tree_p, 0, 0.0};
  EXPECT_DOUBLE_EQ(weak_llr(flipped, Eigen::VectorXi::Zero(1)), -10.0);
  EXPECT_NEAR(weak_llr(pair, Eigen::VectorXi::Zero(1), 30.0), 25.0, 1e-12);
}

TEST(Beta, Formula) {
  EXPECT_EQ(beta_from_epsilon(0.5), 0.0);
  EXPECT_NEAR(beta_from_epsilon(0.1), 1.098612, 1e-6);
}

TEST(Reweight, HandComputedFourSampleStep) {
  const Eigen::Vector4d d = Eigen::Vector4d::Constant(0.25);
  const Eigen::Vector4i y(1, 1, -1, -1);
  const Eigen::Vector4d h(2.0, -1.0, -3.0, -0.5);
  const double eps = weighted_error(d, y, h);
  EXPECT_DOUBLE_EQ(eps, 0.25);
  const double beta = beta_from_epsilon(eps);
  EXPECT_NEAR(beta, 0.5 * std::log(3.0), 1e-15);
  const auto rw = reweight(d, y, h, beta, Margin::Sign);
  EXPECT_NEAR(rw.z_norm, std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_NEAR(rw.weights(0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(rw.weights(1), 0.5, 1e-15);
  EXPECT_NEAR(rw.weights(2), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(rw.weights(3), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(rw.weights.sum(), 1.0, 1e-15);
}

TEST(Reweight, ClampedLlrMarginUsesScore) {
  const Eigen::Vector2d d(0.5, 0.5);
  const Eigen::Vector2i y(1, -1);
  const Eigen::Vector2d h(2.0, 0.5);
  const auto rw = reweight(d, y, h, 1.0, Margin::ClampedLlr);
  const double a = 0.5 * std::exp(-2.0), b = 0.5 * std::exp(0.5);
  EXPECT_NEAR(rw.z_norm, a + b, 1e-15);
  EXPECT_NEAR(rw.weights(0), a / (a + b), 1e-15);
}

TEST(Reweight, ZeroScoreCountsAsClassQ) {
  const Eigen::Vector2d d(0.5, 0.5);
  EXPECT_EQ(sign_decision(0.0), -1);
  EXPECT_DOUBLE_EQ(weighted_error(d, Eigen::Vector2i(1, -1), Eigen::Vector2d::Zero()), 0.5);
}

TEST(Reweight, ErrorIsClamped) {
  const Eigen::Vector2d d(0.5, 0.5);
  const Eigen::Vector2i y(1, -1);
  EXPECT_DOUBLE_EQ(weighted_error(d, y, Eigen::Vector2d(1, -1)), kEpsilonFloor);
  EXPECT_DOUBLE_EQ(weighted_error(d, y, Eigen::Vector2d(-1, 1)), 1 - kEpsilonFloor);
}

TEST(BoostRound, RejectsChanceLevelLearner) {
  // Samples identical across classes: every tree is at chance.
  SymbolMatrix s(4, 2);
  s << 0, 1, 0, 1, 1, 0, 1, 0;
  const auto ds = WeightedDataset::uniform(s, Eigen::Vector4i(1, -1, 1, -1), {2, 2});
  EXPECT_FALSE(boost_round(ds, 1, {}).has_value());
}

TEST(BoostRound, RecordsConsistentStatistics) {
  const auto q = quantized_synth(small_spec(), 3, 4);
  const auto out = boost_round(q.ds, 1, {});
  ASSERT_TRUE(out.has_value());
  EXPECT_LT(out->round.epsilon, 0.5);
  EXPECT_GE(out->round.epsilon, kEpsilonFloor);
  EXPECT_NEAR(out->round.beta, beta_from_epsilon(out->round.epsilon), 1e-12);
  EXPECT_GT(out->round.z_norm, 0.0);
  EXPECT_NEAR(out->next_weights.sum(), 1.0, 1e-10);
  EXPECT_EQ(out->round.pair.iteration, 1);
  EXPECT_EQ(out->round.pair.tree_p.nodes().size(), static_cast<std::size_t>(q.layout.total()));
  // Misclassified samples gain weight relative to correctly classified ones.
  for (Index i = 0; i < q.ds.samples(); ++i) {
    const double h = weak_llr(out->round.pair, q.ds.symbols.row(i).transpose());
    const double ratio = out->next_weights(i) / q.ds.weights(i);
    if (sign_decision(h) == q.ds.labels(i))
      EXPECT_LT(ratio, 1.0 / out->round.z_norm);
    else
      EXPECT_GT(ratio, 1.0 / out->round.z_norm);
  }
}

TEST(Thicken, ZeroRoundsKeepsOnlyTheForest) {
  const auto q = quantized_synth(small_spec(), 5, 4);
  BoostConfig config;
  config.t_max = 0;
  const auto model = thicken(q.ds, q.layout, config);
  ASSERT_EQ(model.rounds.size(), 1u);
  const auto u = edge_union(model);
  const auto& r0 = model.rounds[0].pair;
  EXPECT_EQ(u.p, std::set<Edge>(r0.tree_p.edges().begin(), r0.tree_p.edges().end()));
  EXPECT_EQ(u.q, std::set<Edge>(r0.tree_q.edges().begin(), r0.tree_q.edges().end()));
  // Per-set spanning trees: 3 edges per 4-node set.
  EXPECT_EQ(r0.tree_p.edges().size(), 9u);
}

TEST(Thicken, RoundZeroNeverCrossesSets) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = quantized_synth(small_spec(), seed, 4);
    for (bool forest : {false, true}) {
      BoostConfig config;
      config.allow_forest = forest;
      const auto model = thicken(q.ds, q.layout, config);
      for (const auto* tree : {&model.rounds[0].pair.tree_p, &model.rounds[0].pair.tree_q})
        for (const Edge& e : tree->edges()) EXPECT_EQ(q.layout.set_of(e.u), q.layout.set_of(e.v));
    }
  }
}

TEST(Thicken, RoundInvariants) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = quantized_synth(small_spec(), seed, 4);
    for (Margin margin : {Margin::Sign, Margin::ClampedLlr}) {
      BoostConfig config;
      config.margin = margin;
      config.j_tol = 0.0;
      const auto model = thicken(q.ds, q.layout, config);
      ASSERT_GE(model.rounds.size(), 1u);
      EXPECT_LE(model.rounds.size(), static_cast<std::size_t>(config.t_max + 1));
      for (std::size_t t = 0; t < model.rounds.size(); ++t) {
        const auto& r = model.rounds[t];
        EXPECT_EQ(r.beta, beta_from_epsilon(r.epsilon));
        EXPECT_GT(r.z_norm, 0.0);
        EXPECT_EQ(r.pair.iteration, static_cast<int>(t));
        const auto before = edge_union(model, static_cast<int>(t) - 1);
        const auto after = edge_union(model, static_cast<int>(t));
        if (t > 0) {
          EXPECT_TRUE(std::includes(after.p.begin(), after.p.end(), before.p.begin(), before.p.end()));
          EXPECT_TRUE(std::includes(after.q.begin(), after.q.end(), before.q.begin(), before.q.end()));
        }
      }
    }
  }
}

TEST(Thicken, Deterministic) {
  const auto q = quantized_synth(small_spec(), 9, 4);
  for (bool resample : {false, true}) {
    BoostConfig config;
    config.resample = resample;
    config.seed = 42;
    const auto a = thicken(q.ds, q.layout, config);
    const auto b = thicken(q.ds, q.layout, config);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    for (std::size_t t = 0; t < a.rounds.size(); ++t) {
      EXPECT_EQ(a.rounds[t].pair.tree_p, b.rounds[t].pair.tree_p);
      EXPECT_EQ(a.rounds[t].pair.tree_q, b.rounds[t].pair.tree_q);
      EXPECT_EQ(a.rounds[t].beta, b.rounds[t].beta);
      EXPECT_EQ(a.rounds[t].z_norm, b.rounds[t].z_norm);
    }
  }
}

TEST(Thicken, StopsOnSmallJChange) {
  const auto q = quantized_synth(small_spec(), 4, 4);
  BoostConfig loose;
  loose.j_tol = 1e9;
  EXPECT_LE(thicken(q.ds, q.layout, loose).rounds.size(), 2u);
}

TEST(Thicken, PlantedCrossPairIsPickedUp) {
  SynthSpec spec;
  spec.within_p = spec.within_q = 0.5;
  spec.cross_pairs = {{1, 6}};
  spec.samples_p = spec.samples_q = 1000;
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto q = quantized_synth(spec, seed, 2);
    const auto model = thicken(q.ds, q.layout, {});
    bool crossed = false;
    for (std::size_t t = 1; t < model.rounds.size(); ++t)
      for (const Edge& e : model.rounds[t].pair.tree_p.edges())
        crossed |= (q.layout.set_of(e.u) == 0 && q.layout.set_of(e.v) == 1);
    hits += crossed;
  }
  EXPECT_GE(hits, 18);
}

TEST(Thicken, IndependentSetsHaveNegligibleCrossWeights) {
  SynthSpec spec;
  spec.cross_pairs.clear();
  spec.samples_p = spec.samples_q = 5000;
  const auto q = quantized_synth(spec, 1, 2);
  BoostConfig config;
  config.allow_forest = true;
  const auto model = thicken(q.ds, q.layout, config);
  const auto nodes = q.layout.all_variables();
  for (int label : {1, -1}) {
    const auto p = fit_empirical_model(q.ds, nodes, 1.0 / 5000, label);
    const auto o = fit_empirical_model(q.ds, nodes, 1.0 / 5000, -label);
    double cross = 0, within = 0;
    for (const auto& w : discriminative_weights(p, o, nodes)) {
      const bool crosses = q.layout.set_of(w.edge.u) != q.layout.set_of(w.edge.v);
      (crosses ? cross : within) = std::max(crosses ? cross : within, std::abs(w.weight));
    }
    EXPECT_LT(cross, 0.01);
    EXPECT_GT(within, 0.05);
  }
  // Cross-set edges that later rounds do add carry near-zero log-ratio tables.
  for (std::size_t t = 1; t < model.rounds.size(); ++t) {
    const auto& tree = model.rounds[t].pair.tree_p;
    for (std::size_t k = 0; k < tree.edges().size(); ++k) {
      const Edge& e = tree.edges()[k];
      if (q.layout.set_of(e.u) != q.layout.set_of(e.v))
        EXPECT_LT(tree.edge_log_ratio()[k].cwiseAbs().maxCoeff(), 0.1);
    }
  }
}

TEST(StrongLlr, SingleRoundWithUnitBetaIsWeakLlr) {
  const auto pair = one_node_pair(Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0.4, 0.6));
  const auto model = rounds_model({{pair, 1.0}});
  for (int s = 0; s < 2; ++s) {
    const Eigen::VectorXi x = Eigen::VectorXi::Constant(1, s);
    EXPECT_EQ(strong_llr(model, x), weak_llr(pair, x));
  }
}

TEST(StrongLlr, ZeroBetasScoreZeroAndDecideQ) {
  const auto pair = one_node_pair(Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0.4, 0.6));
  const auto model = rounds_model({{pair, 0.0}, {pair, 0.0}});
  const Eigen::VectorXi x = Eigen::VectorXi::Zero(1);
  EXPECT_EQ(strong_llr(model, x), 0.0);
  EXPECT_FALSE(decide_p(model, x));
}

TEST(StrongLlr, TwoRoundHandSum) {
  const auto a = one_node_pair(Eigen::Vector2d(0.8, 0.2), Eigen::Vector2d(0.5, 0.5));
  const auto b = one_node_pair(Eigen::Vector2d(0.25, 0.75), Eigen::Vector2d(0.5, 0.5));
  const auto model = rounds_model({{a, 0.5}, {b, 2.0}});
  const Eigen::VectorXi x = Eigen::VectorXi::Zero(1);
  EXPECT_NEAR(strong_llr(model, x), 0.5 * std::log(1.6) + 2.0 * std::log(0.5), 1e-14);
  BoostedModel shifted = model;
  shifted.tau = -10;
  EXPECT_TRUE(decide_p(shifted, x));
}

TEST(EdgeUnion, CollapsesDuplicates) {
  const std::vector<Index> nodes{0, 1, 2, 3};
  const Eigen::VectorXd t = Eigen::Vector2d::Constant(std::log(0.5));
  const Eigen::MatrixXd z = Eigen::Matrix2d::Zero();
  const TreeGraph one(nodes, {t, t, t, t}, {Edge(0, 1)}, {z});
  const TreeGraph two(nodes, {t, t, t, t}, {Edge(0, 1), Edge(2, 3)}, {z, z});
  const auto model = rounds_model({{TreePair{one, one, 0, 0}, 1.0}, {TreePair{two, one, 1, 0}, 1.0}}, 4);
  const auto u = edge_union(model);
  EXPECT_EQ(u.p, (std::set<Edge>{Edge(0, 1), Edge(2, 3)}));
  EXPECT_EQ(u.q, (std::set<Edge>{Edge(0, 1)}));
}

TEST(EdgeUnion, SizeBoundedBySumOfRounds) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = quantized_synth(small_spec(), seed, 4);
    BoostConfig config;
    config.j_tol = 0;
    const auto model = thicken(q.ds, q.layout, config);
    std::size_t total = 0;
    std::set<Edge> seen;
    bool disjoint = true;
    for (const auto& r : model.rounds) {
      total += r.pair.tree_p.edges().size();
      for (const Edge& e : r.pair.tree_p.edges()) disjoint &= seen.insert(e).second;
    }
    const auto u = edge_union(model);
    EXPECT_LE(u.p.size(), total);
    EXPECT_EQ(u.p.size() == total, disjoint);
  }
}

TEST(FactorCount, ForestOfThreeSets) {
  const auto q = quantized_synth(small_spec(), 2, 4);
  BoostConfig config;
  config.t_max = 0;
  const auto model = thicken(q.ds, q.layout, config);
  EXPECT_EQ(factor_evaluation_count(model, q.ds.symbols.row(0).transpose()), 42u);
}

TEST(FactorCount, SingleNodeSingleRound) {
  const auto model = rounds_model({{one_node_pair(Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.3, 0.7)), 1.0}});
  EXPECT_EQ(factor_evaluation_count(model, Eigen::VectorXi::Zero(1)), 2u);
}

TEST(FactorCount, BoundHoldsOnTrainedModels) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto q = quantized_synth(small_spec(), seed, 4);
    for (bool forest : {false, true}) {
      BoostConfig config;
      config.allow_forest = forest;
      config.j_tol = 0;
      const auto model = thicken(q.ds, q.layout, config);
      const std::size_t n = static_cast<std::size_t>(q.layout.total());
      const std::size_t bound = 2 * model.rounds.size() * (2 * n - 1);
      for (Index i = 0; i < 20; ++i) EXPECT_LE(factor_evaluation_count(model, q.ds.symbols.row(i).transpose()), bound);
    }
  }
}

TEST(Thicken, ConfigErrors) {
  const auto q = quantized_synth(small_spec(), 0, 4);
  BoostConfig bad;
  bad.alpha = 0;
  EXPECT_THROW(thicken(q.ds, q.layout, bad), ConfigError);
  bad = {};
  bad.t_max = -1;
  EXPECT_THROW(thicken(q.ds, q.layout, bad), ConfigError);
  EXPECT_THROW(thicken(q.ds, FeatureLayout({4, 4}), {}), ConfigError);
}
