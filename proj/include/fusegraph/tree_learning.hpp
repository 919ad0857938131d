#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "fusegraph/distributions.hpp"

namespace fusegraph {

/// Undirected edge between two global variable ids, stored with u < v.
struct Edge {
  Index u = 0;
  Index v = 0;

  Edge() = default;
  Edge(Index a, Index b) : u(std::min(a, b)), v(std::max(a, b)) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct WeightedEdge {
  Edge edge;
  double weight = 0.0;
};

enum class TreeKind { Generative, Discriminative };

struct Provenance {
  TreeKind kind = TreeKind::Generative;
  char distribution = 'p';  // 'p' or 'q'
  int iteration = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Tree (or forest) factorization with log node marginals and log edge ratios
/// log[p_ij / (p_i p_j)]. Edge tables have rows indexed by edge.u.
class TreeGraph {
public:
  TreeGraph() = default;
  TreeGraph(std::vector<Index> nodes, std::vector<Eigen::VectorXd> node_log, std::vector<Edge> edges,
            std::vector<Eigen::MatrixXd> edge_log_ratio, Provenance provenance = {});

  const std::vector<Index>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Eigen::VectorXd>& node_log() const { return node_log_; }
  const std::vector<Eigen::MatrixXd>& edge_log_ratio() const { return edge_log_; }
  const Provenance& provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }

  int cells(Index variable) const;

  /// log p(x) under the factorization; `lookups` (if given) is incremented once per
  /// node and edge table read.
  double log_likelihood(const Eigen::Ref<const Eigen::VectorXi>& sample, std::size_t* lookups = nullptr) const;

  friend bool operator==(const TreeGraph&, const TreeGraph&) = default;

private:
  Index position(Index variable) const;

  std::vector<Index> nodes_;
  std::vector<Eigen::VectorXd> node_log_;
  std::vector<Edge> edges_;
  std::vector<Eigen::MatrixXd> edge_log_;
  Provenance provenance_;
  std::vector<Index> position_;
};

/// Jointly learned (p, q) tree pair.
struct TreePair {
  TreeGraph tree_p;
  TreeGraph tree_q;
  int iteration = 0;
  double j_divergence = 0.0;
};

struct TreeOptions {
  /// Drop edges whose weight is <= 0 after the spanning tree is built.
  bool allow_forest = false;
};

/// Kruskal maximum-weight spanning tree. Equal weights are resolved in lexicographic
/// (u, v) order.
std::vector<Edge> max_weight_spanning_tree(std::span<const Index> nodes, std::vector<WeightedEdge> candidates);

/// Tree over `edges` with tables taken from `model`.
TreeGraph build_tree(const EmpiricalModel& model, std::span<const Index> nodes, std::vector<Edge> edges,
                     Provenance provenance = {});

/// Chow-Liu tree: MWST under mutual-information edge weights.
TreeGraph chow_liu_tree(const EmpiricalModel& model, std::span<const Index> nodes);

/// psi(i, j) = sum_ab [p_ij - q_ij] log[p_ij / (p_i p_j)]. Swap the arguments for the
/// q-side weight.
double discriminative_edge_weight(const EmpiricalModel& p_model, const EmpiricalModel& q_model, Index i, Index j);

/// Candidate edges over all pairs of `nodes` with discriminative weights for `p_model`.
std::vector<WeightedEdge> discriminative_weights(const EmpiricalModel& p_model, const EmpiricalModel& q_model,
                                                 std::span<const Index> nodes);

TreePair learn_discriminative_tree_pair(const EmpiricalModel& p_model, const EmpiricalModel& q_model,
                                        std::span<const Index> nodes, TreeOptions options = {}, int iteration = 0);

/// Closed-form tree-approximate J-divergence of the pair's structures under the
/// empirical pairwise marginals.
double tree_approx_j_divergence(const TreePair& pair, const EmpiricalModel& p_model, const EmpiricalModel& q_model);

inline double tree_log_likelihood(const TreeGraph& tree, const Eigen::Ref<const Eigen::VectorXi>& sample) {
  return tree.log_likelihood(sample);
}

}  // namespace fusegraph
