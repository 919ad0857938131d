#include "fusegraph/boosting.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace fusegraph {

namespace {

struct ClassModels {
  EmpiricalModel p;
  EmpiricalModel q;
};

double class_alpha(const WeightedDataset& ds, int label, double alpha) {
  double mass = 0.0;
  Index count = 0;
  for (Index s = 0; s < ds.samples(); ++s)
    if (ds.labels(s) == label) {
      mass += ds.weights(s);
      ++count;
    }
  if (count == 0 || !(mass > 0)) throw DataError("boosting: no training mass for class " + std::to_string(label));
  return alpha * mass / static_cast<double>(count);
}

WeightedDataset bootstrap(const WeightedDataset& ds, std::uint64_t seed, int t) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(t)};
  std::mt19937_64 rng(seq);
  std::discrete_distribution<Index> pick(ds.weights.data(), ds.weights.data() + ds.weights.size());
  const Index n = ds.samples();
  SymbolMatrix symbols(n, ds.variables());
  Eigen::VectorXi labels(n);
  for (Index r = 0; r < n; ++r) {
    const Index s = pick(rng);
    symbols.row(r) = ds.symbols.row(s);
    labels(r) = ds.labels(s);
  }
  // A bootstrap can miss a class entirely; keep one copy of its heaviest sample.
  for (int label : {1, -1}) {
    if ((labels.array() == label).any()) continue;
    Index best = -1;
    for (Index s = 0; s < n; ++s)
      if (ds.labels(s) == label && (best < 0 || ds.weights(s) > ds.weights(best))) best = s;
    if (best < 0) break;
    symbols.row(0) = ds.symbols.row(best);
    labels(0) = label;
  }
  return WeightedDataset::uniform(std::move(symbols), std::move(labels), ds.cells);
}

ClassModels fit_class_models(const WeightedDataset& ds, std::span<const Index> nodes, const BoostConfig& config,
                             int t) {
  if (config.resample) {
    const WeightedDataset sample = bootstrap(ds, config.seed, t);
    return {fit_empirical_model(sample, nodes, class_alpha(sample, 1, config.alpha), 1),
            fit_empirical_model(sample, nodes, class_alpha(sample, -1, config.alpha), -1)};
  }
  return {fit_empirical_model(ds, nodes, class_alpha(ds, 1, config.alpha), 1),
          fit_empirical_model(ds, nodes, class_alpha(ds, -1, config.alpha), -1)};
}

void check_config(const BoostConfig& config) {
  if (config.t_max < 0) throw ConfigError("boosting: t_max must be non-negative");
  if (!(config.alpha > 0)) throw ConfigError("boosting: alpha must be positive");
  if (!(config.llr_clamp > 0)) throw ConfigError("boosting: llr clamp must be positive");
  if (!(config.j_tol >= 0)) throw ConfigError("boosting: j_tol must be non-negative");
}

}  // namespace

double weak_llr(const TreePair& pair, const Eigen::Ref<const Eigen::VectorXi>& sample, double clamp,
                std::size_t* lookups) {
  const double h = pair.tree_p.log_likelihood(sample, lookups) - pair.tree_q.log_likelihood(sample, lookups);
  return std::clamp(h, -clamp, clamp);
}

double weighted_error(const Eigen::VectorXd& weights, const Eigen::VectorXi& labels, const Eigen::VectorXd& h) {
  double eps = 0.0;
  for (Index i = 0; i < weights.size(); ++i)
    if (sign_decision(h(i)) != labels(i)) eps += weights(i);
  return std::clamp(eps, kEpsilonFloor, 1.0 - kEpsilonFloor);
}

Reweighting reweight(const Eigen::VectorXd& weights, const Eigen::VectorXi& labels, const Eigen::VectorXd& h,
                     double beta, Margin margin) {
  Eigen::VectorXd next(weights.size());
  for (Index i = 0; i < weights.size(); ++i) {
    const double m = margin == Margin::Sign ? static_cast<double>(sign_decision(h(i))) : h(i);
    next(i) = weights(i) * std::exp(-beta * labels(i) * m);
  }
  const double z = next.sum();
  if (!(z > 0) || !std::isfinite(z)) throw DataError("boosting: weight normalizer is degenerate");
  return {next / z, z};
}

std::optional<RoundOutcome> complete_round(const WeightedDataset& ds, TreePair pair, const BoostConfig& config) {
  Eigen::VectorXd h(ds.samples());
  for (Index s = 0; s < ds.samples(); ++s) h(s) = weak_llr(pair, ds.symbols.row(s).transpose(), config.llr_clamp);
  const double eps = weighted_error(ds.weights, ds.labels, h);
  if (eps >= 0.5) return std::nullopt;
  RoundOutcome out;
  out.round.epsilon = eps;
  out.round.beta = beta_from_epsilon(eps);
  auto rw = reweight(ds.weights, ds.labels, h, out.round.beta, config.margin);
  out.round.z_norm = rw.z_norm;
  out.round.j_divergence = pair.j_divergence;
  out.round.pair = std::move(pair);
  out.next_weights = std::move(rw.weights);
  return out;
}

std::optional<RoundOutcome> boost_round(const WeightedDataset& ds, int t, const BoostConfig& config) {
  check_config(config);
  std::vector<Index> nodes(static_cast<std::size_t>(ds.variables()));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  const auto models = fit_class_models(ds, nodes, config, t);
  auto pair = learn_discriminative_tree_pair(models.p, models.q, nodes, {config.allow_forest}, t);
  return complete_round(ds, std::move(pair), config);
}

BoostedModel thicken(const WeightedDataset& ds, const FeatureLayout& layout, const BoostConfig& config) {
  check_config(config);
  ds.validate();
  if (layout.total() != ds.variables()) throw ConfigError("thicken: layout does not match variable count");

  BoostedModel model;
  model.layout = layout;
  model.llr_clamp = config.llr_clamp;

  const auto nodes = layout.all_variables();
  const auto models = fit_class_models(ds, nodes, config, 0);
  std::vector<Edge> edges_p;
  std::vector<Edge> edges_q;
  for (Index set = 0; set < layout.sets(); ++set) {
    const auto vars = layout.variables(set);
    const auto local = learn_discriminative_tree_pair(models.p, models.q, vars, {config.allow_forest}, 0);
    edges_p.insert(edges_p.end(), local.tree_p.edges().begin(), local.tree_p.edges().end());
    edges_q.insert(edges_q.end(), local.tree_q.edges().begin(), local.tree_q.edges().end());
  }
  TreePair forest;
  forest.tree_p = build_tree(models.p, nodes, std::move(edges_p), {TreeKind::Discriminative, 'p', 0});
  forest.tree_q = build_tree(models.q, nodes, std::move(edges_q), {TreeKind::Discriminative, 'q', 0});
  forest.j_divergence = tree_approx_j_divergence(forest, models.p, models.q);

  WeightedDataset current = ds;
  auto first = complete_round(current, forest, config);
  if (!first) {
    // Chance-level forest: keep its structure with zero vote and stop.
    BoostRound zero;
    zero.j_divergence = forest.j_divergence;
    zero.pair = std::move(forest);
    model.rounds.push_back(std::move(zero));
    return model;
  }
  model.rounds.push_back(first->round);
  current.weights = first->next_weights;

  double previous_j = first->round.j_divergence;
  for (int t = 1; t <= config.t_max; ++t) {
    auto next = boost_round(current, t, config);
    if (!next) break;
    const double j = next->round.j_divergence;
    model.rounds.push_back(std::move(next->round));
    current.weights = std::move(next->next_weights);
    if (std::abs(j - previous_j) / std::max(std::abs(previous_j), 1e-12) < config.j_tol) break;
    previous_j = j;
  }
  return model;
}

double strong_llr(const BoostedModel& model, const Eigen::Ref<const Eigen::VectorXi>& sample, std::size_t* lookups) {
  double score = 0.0;
  for (const auto& round : model.rounds) score += round.beta * weak_llr(round.pair, sample, model.llr_clamp, lookups);
  return score;
}

EdgeUnion edge_union(const BoostedModel& model, int last_round) {
  EdgeUnion out;
  const auto stop = last_round < 0 ? model.rounds.size()
                                   : std::min(model.rounds.size(), static_cast<std::size_t>(last_round) + 1);
  for (std::size_t t = 0; t < stop; ++t) {
    out.p.insert(model.rounds[t].pair.tree_p.edges().begin(), model.rounds[t].pair.tree_p.edges().end());
    out.q.insert(model.rounds[t].pair.tree_q.edges().begin(), model.rounds[t].pair.tree_q.edges().end());
  }
  return out;
}

std::size_t factor_evaluation_count(const BoostedModel& model, const Eigen::Ref<const Eigen::VectorXi>& sample) {
  std::size_t lookups = 0;
  strong_llr(model, sample, &lookups);
  return lookups;
}

}  // namespace fusegraph
