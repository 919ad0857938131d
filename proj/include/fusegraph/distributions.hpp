#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "fusegraph/error.hpp"

namespace fusegraph {

using Index = Eigen::Index;
using SymbolMatrix = Eigen::MatrixXi;

/// Per-dimension quantile binning of continuous features into discrete symbols.
class Quantizer {
public:
  Quantizer() = default;
  Quantizer(std::vector<std::vector<double>> edges, int bins);

  /// Fits edges at the empirical k/B quantiles of every column.
  static Quantizer fit(const Eigen::MatrixXd& columns, int bins);

  Index dims() const { return static_cast<Index>(edges_.size()); }
  int bins() const { return bins_; }
  int cells(Index dim) const { return static_cast<int>(edges_[dim].size()) + 1; }
  std::vector<int> cell_counts() const;
  const std::vector<double>& edges(Index dim) const { return edges_[dim]; }
  const std::vector<std::vector<double>>& all_edges() const { return edges_; }

  int quantize(Index dim, double x) const;
  Eigen::VectorXi quantize(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  SymbolMatrix quantize_rows(const Eigen::MatrixXd& rows) const;

  friend bool operator==(const Quantizer&, const Quantizer&) = default;

private:
  std::vector<std::vector<double>> edges_;
  int bins_ = 0;
};

inline Quantizer fit_quantizer(const Eigen::MatrixXd& columns, int bins) {
  return Quantizer::fit(columns, bins);
}

inline Eigen::VectorXi quantize(const Quantizer& q, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return q.quantize(x);
}

/// Discrete training samples with labels in {-1, +1} and a probability mass per sample.
struct WeightedDataset {
  SymbolMatrix symbols;      // N x n_total
  Eigen::VectorXi labels;    // +1 = class p, -1 = class q
  Eigen::VectorXd weights;   // sums to one
  std::vector<int> cells;    // alphabet size per variable

  Index samples() const { return symbols.rows(); }
  Index variables() const { return symbols.cols(); }

  /// Throws DataError unless weights are a distribution and symbols are in range.
  void validate() const;

  /// Uniform weights 1/N over all samples.
  static WeightedDataset uniform(SymbolMatrix symbols, Eigen::VectorXi labels, std::vector<int> cells);
};

/// Smoothed, sample-weighted node marginals and pairwise joints over a set of variables.
///
/// Pair tables are stored for every unordered pair of local positions. Each pair table
/// carries a pseudocount of alpha spread uniformly over its cells, so every row and
/// column sum equals the corresponding node marginal (which receives alpha spread over
/// its own cells) and all tables are marginals of one smoothed joint distribution.
class EmpiricalModel {
public:
  EmpiricalModel() = default;

  /// Builds a model from explicit tables. `pairs` follows pair_index order.
  EmpiricalModel(std::vector<Index> variables, std::vector<Eigen::VectorXd> marginals,
                 std::vector<Eigen::MatrixXd> pairs, double alpha = 0.0);

  const std::vector<Index>& variables() const { return variables_; }
  Index size() const { return static_cast<Index>(variables_.size()); }
  double alpha() const { return alpha_; }
  int cells(Index local) const { return static_cast<int>(marginals_[local].size()); }

  /// Local position of a global variable id; throws if absent.
  Index local(Index variable) const;
  bool contains(Index variable) const;

  const Eigen::VectorXd& marginal(Index variable) const { return marginals_[local(variable)]; }

  /// Joint table with rows indexed by `first` and columns by `second`.
  Eigen::MatrixXd joint(Index first, Index second) const;

  const Eigen::VectorXd& marginal_at(Index i) const { return marginals_[i]; }
  const Eigen::MatrixXd& pair_at(Index i, Index j) const;  // requires i < j (local)

  static Index pair_index(Index i, Index j, Index n) {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

private:
  std::vector<Index> variables_;
  std::vector<Index> lookup_;  // global id -> local position, -1 if absent
  std::vector<Eigen::VectorXd> marginals_;
  std::vector<Eigen::MatrixXd> pairs_;
  double alpha_ = 0.0;
};

/// Fits p~ over `variables` from the samples whose label equals `label` (all samples when
/// unset). Counts are weighted by the dataset mass; `alpha` is added in the same units.
EmpiricalModel fit_empirical_model(const WeightedDataset& ds, std::span<const Index> variables,
                                   double alpha, std::optional<int> label = std::nullopt);

namespace detail {
constexpr double kNormalizationTolerance = 1e-8;
constexpr double kNegativeTolerance = 1e-12;
}  // namespace detail

/// I(A;B) in nats of a normalized pairwise table. Zero cells contribute nothing.
template <typename Derived>
double mutual_information(const Eigen::MatrixBase<Derived>& joint) {
  using std::log;
  const double total = joint.sum();
  if (!std::isfinite(total) || std::abs(total - 1.0) > detail::kNormalizationTolerance)
    throw DataError("mutual_information: table is not normalized");
  if ((joint.array() < 0).any()) throw DataError("mutual_information: negative entry");
  const Eigen::VectorXd row = joint.rowwise().sum();
  const Eigen::RowVectorXd col = joint.colwise().sum();
  double mi = 0.0;
  for (Index b = 0; b < joint.cols(); ++b)
    for (Index a = 0; a < joint.rows(); ++a) {
      const double p = joint(a, b);
      if (p > 0) mi += p * log(p / (row(a) * col(b)));
    }
  if (mi < 0) {
    if (mi < -detail::kNegativeTolerance) throw DataError("mutual_information: negative result");
    mi = 0.0;
  }
  return mi;
}

/// D(p || q) in nats. Both tables must be strictly positive, normalized, same shape.
template <typename DerivedP, typename DerivedQ>
double kl_divergence(const Eigen::DenseBase<DerivedP>& p, const Eigen::DenseBase<DerivedQ>& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols())
    throw DataError("kl_divergence: shape mismatch");
  if ((p.derived().array() <= 0).any() || (q.derived().array() <= 0).any())
    throw DataError("kl_divergence: tables must be strictly positive");
  if (std::abs(p.sum() - 1.0) > detail::kNormalizationTolerance ||
      std::abs(q.sum() - 1.0) > detail::kNormalizationTolerance)
    throw DataError("kl_divergence: table is not normalized");
  const double d = (p.derived().array() * (p.derived().array() / q.derived().array()).log()).sum();
  if (d < -detail::kNegativeTolerance) throw DataError("kl_divergence: negative result");
  return d < 0 ? 0.0 : d;
}

}  // namespace fusegraph
