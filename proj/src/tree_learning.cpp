#include "fusegraph/tree_learning.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fusegraph/parallel.hpp"

namespace fusegraph {

namespace {

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

std::vector<Index> build_position(std::span<const Index> nodes) {
  Index max_id = -1;
  for (Index v : nodes) max_id = std::max(max_id, v);
  std::vector<Index> pos(static_cast<std::size_t>(max_id + 1), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k] < 0) throw ConfigError("tree: negative node id");
    if (pos[static_cast<std::size_t>(nodes[k])] >= 0) throw ConfigError("tree: duplicate node");
    pos[static_cast<std::size_t>(nodes[k])] = static_cast<Index>(k);
  }
  return pos;
}

std::vector<std::pair<Index, Index>> all_pairs(std::span<const Index> nodes) {
  std::vector<std::pair<Index, Index>> out;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b) out.emplace_back(nodes[a], nodes[b]);
  return out;
}

}  // namespace

TreeGraph::TreeGraph(std::vector<Index> nodes, std::vector<Eigen::VectorXd> node_log, std::vector<Edge> edges,
                     std::vector<Eigen::MatrixXd> edge_log_ratio, Provenance provenance)
    : nodes_(std::move(nodes)),
      node_log_(std::move(node_log)),
      edges_(std::move(edges)),
      edge_log_(std::move(edge_log_ratio)),
      provenance_(provenance),
      position_(build_position(nodes_)) {
  if (node_log_.size() != nodes_.size()) throw ConfigError("tree: node table count mismatch");
  if (edge_log_.size() != edges_.size()) throw ConfigError("tree: edge table count mismatch");
  if (!nodes_.empty() && edges_.size() > nodes_.size() - 1) throw ConfigError("tree: too many edges");
  DisjointSets sets(nodes_.size());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    const Index a = position(e.u);
    const Index b = position(e.v);
    if (!sets.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(b)))
      throw ConfigError("tree: edge set contains a cycle");
    if (edge_log_[k].rows() != node_log_[static_cast<std::size_t>(a)].size() ||
        edge_log_[k].cols() != node_log_[static_cast<std::size_t>(b)].size())
      throw ConfigError("tree: edge table shape mismatch");
  }
}

Index TreeGraph::position(Index variable) const {
  if (variable < 0 || variable >= static_cast<Index>(position_.size()) ||
      position_[static_cast<std::size_t>(variable)] < 0)
    throw ConfigError("tree: variable " + std::to_string(variable) + " is not a node");
  return position_[static_cast<std::size_t>(variable)];
}

int TreeGraph::cells(Index variable) const {
  return static_cast<int>(node_log_[static_cast<std::size_t>(position(variable))].size());
}

double TreeGraph::log_likelihood(const Eigen::Ref<const Eigen::VectorXi>& sample, std::size_t* lookups) const {
  auto symbol = [&](Index variable, Index cells) {
    if (variable >= sample.size()) throw DataError("tree: sample does not cover node " + std::to_string(variable));
    const int s = sample(variable);
    if (s < 0 || s >= cells) throw DataError("tree: symbol out of range for node " + std::to_string(variable));
    return s;
  };
  double ll = 0.0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& table = node_log_[k];
    ll += table(symbol(nodes_[k], table.size()));
  }
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const auto& table = edge_log_[k];
    ll += table(symbol(edges_[k].u, table.rows()), symbol(edges_[k].v, table.cols()));
  }
  if (lookups) *lookups += nodes_.size() + edges_.size();
  return ll;
}

namespace {

std::vector<WeightedEdge> kruskal(std::span<const Index> nodes, std::vector<WeightedEdge> candidates) {
  const auto position = build_position(nodes);
  auto lookup = [&](Index v) {
    if (v < 0 || v >= static_cast<Index>(position.size()) || position[static_cast<std::size_t>(v)] < 0)
      throw ConfigError("spanning tree: candidate edge outside node set");
    return static_cast<std::size_t>(position[static_cast<std::size_t>(v)]);
  };
  std::sort(candidates.begin(), candidates.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.edge < b.edge;
  });
  DisjointSets sets(nodes.size());
  std::vector<WeightedEdge> tree;
  for (const auto& c : candidates) {
    if (tree.size() + 1 >= nodes.size()) break;
    if (sets.unite(lookup(c.edge.u), lookup(c.edge.v))) tree.push_back(c);
  }
  return tree;
}

}  // namespace

std::vector<Edge> max_weight_spanning_tree(std::span<const Index> nodes, std::vector<WeightedEdge> candidates) {
  std::vector<Edge> out;
  for (const auto& w : kruskal(nodes, std::move(candidates))) out.push_back(w.edge);
  return out;
}

TreeGraph build_tree(const EmpiricalModel& model, std::span<const Index> nodes, std::vector<Edge> edges,
                     Provenance provenance) {
  std::vector<Eigen::VectorXd> node_log;
  node_log.reserve(nodes.size());
  for (Index v : nodes) node_log.push_back(model.marginal(v).array().log().matrix());
  std::vector<Eigen::MatrixXd> edge_log;
  edge_log.reserve(edges.size());
  for (const Edge& e : edges) {
    const Eigen::MatrixXd joint = model.joint(e.u, e.v);
    const Eigen::VectorXd& pu = model.marginal(e.u);
    const Eigen::VectorXd& pv = model.marginal(e.v);
    edge_log.push_back((joint.array() / (pu * pv.transpose()).array()).log().matrix());
  }
  return TreeGraph(std::vector<Index>(nodes.begin(), nodes.end()), std::move(node_log), std::move(edges),
                   std::move(edge_log), provenance);
}

TreeGraph chow_liu_tree(const EmpiricalModel& model, std::span<const Index> nodes) {
  const auto pairs = all_pairs(nodes);
  std::vector<WeightedEdge> candidates(pairs.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(pairs.size()), [&](std::ptrdiff_t k) {
    const auto [i, j] = pairs[static_cast<std::size_t>(k)];
    candidates[static_cast<std::size_t>(k)] = {Edge(i, j), mutual_information(model.joint(i, j))};
  });
  auto edges = max_weight_spanning_tree(nodes, std::move(candidates));
  return build_tree(model, nodes, std::move(edges), {TreeKind::Generative, 'p', 0});
}

double discriminative_edge_weight(const EmpiricalModel& p_model, const EmpiricalModel& q_model, Index i, Index j) {
  const Eigen::MatrixXd p = p_model.joint(i, j);
  const Eigen::MatrixXd q = q_model.joint(i, j);
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw ConfigError("discriminative weight: cell mismatch between models for pair (" + std::to_string(i) + ", " +
                      std::to_string(j) + ")");
  const Eigen::VectorXd& pi = p_model.marginal(i);
  const Eigen::VectorXd& pj = p_model.marginal(j);
  const Eigen::ArrayXXd log_ratio = (p.array() / (pi * pj.transpose()).array()).log();
  return ((p - q).array() * log_ratio).sum();
}

std::vector<WeightedEdge> discriminative_weights(const EmpiricalModel& p_model, const EmpiricalModel& q_model,
                                                 std::span<const Index> nodes) {
  const auto pairs = all_pairs(nodes);
  std::vector<WeightedEdge> out(pairs.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(pairs.size()), [&](std::ptrdiff_t k) {
    const auto [i, j] = pairs[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(k)] = {Edge(i, j), discriminative_edge_weight(p_model, q_model, i, j)};
  });
  return out;
}

namespace {

std::vector<Edge> discriminative_structure(const EmpiricalModel& self, const EmpiricalModel& other,
                                           std::span<const Index> nodes, TreeOptions options) {
  std::vector<Edge> edges;
  for (const auto& w : kruskal(nodes, discriminative_weights(self, other, nodes)))
    if (!options.allow_forest || w.weight > 0.0) edges.push_back(w.edge);
  return edges;
}

}  // namespace

TreePair learn_discriminative_tree_pair(const EmpiricalModel& p_model, const EmpiricalModel& q_model,
                                        std::span<const Index> nodes, TreeOptions options, int iteration) {
  TreePair pair;
  pair.iteration = iteration;
  pair.tree_p = build_tree(p_model, nodes, discriminative_structure(p_model, q_model, nodes, options),
                           {TreeKind::Discriminative, 'p', iteration});
  pair.tree_q = build_tree(q_model, nodes, discriminative_structure(q_model, p_model, nodes, options),
                           {TreeKind::Discriminative, 'q', iteration});
  pair.j_divergence = tree_approx_j_divergence(pair, p_model, q_model);
  return pair;
}

double tree_approx_j_divergence(const TreePair& pair, const EmpiricalModel& p_model, const EmpiricalModel& q_model) {
  if (pair.tree_p.nodes() != pair.tree_q.nodes()) throw ConfigError("J-divergence: trees span different node sets");
  double j = 0.0;
  for (Index v : pair.tree_p.nodes()) {
    const auto& p = p_model.marginal(v);
    const auto& q = q_model.marginal(v);
    if (p.size() != q.size()) throw ConfigError("J-divergence: cell mismatch");
    j += ((p - q).array() * (p.array() / q.array()).log()).sum();
  }
  for (const Edge& e : pair.tree_p.edges()) j += discriminative_edge_weight(p_model, q_model, e.u, e.v);
  for (const Edge& e : pair.tree_q.edges()) j += discriminative_edge_weight(q_model, p_model, e.u, e.v);
  return j;
}

}  // namespace fusegraph
