#include "fusegraph/distributions.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fusegraph/parallel.hpp"

namespace fusegraph {

Quantizer::Quantizer(std::vector<std::vector<double>> edges, int bins)
    : edges_(std::move(edges)), bins_(bins) {
  for (const auto& e : edges_) {
    if (static_cast<int>(e.size()) + 1 > std::max(bins_, 1))
      throw ConfigError("quantizer: more cells than bins");
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (!std::isfinite(e[k])) throw DataError("quantizer: non-finite edge");
      if (k > 0 && !(e[k] > e[k - 1])) throw ConfigError("quantizer: edges not strictly increasing");
    }
  }
}

Quantizer Quantizer::fit(const Eigen::MatrixXd& columns, int bins) {
  if (bins < 2) throw ConfigError("quantizer: bin count must be at least 2");
  if (columns.rows() < 1) throw DataError("quantizer: no samples");
  if (!columns.allFinite()) throw DataError("quantizer: non-finite feature value");
  const Index n = columns.rows();
  std::vector<std::vector<double>> edges(static_cast<std::size_t>(columns.cols()));
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (Index d = 0; d < columns.cols(); ++d) {
    for (Index r = 0; r < n; ++r) sorted[static_cast<std::size_t>(r)] = columns(r, d);
    std::sort(sorted.begin(), sorted.end());
    auto& out = edges[static_cast<std::size_t>(d)];
    for (int k = 1; k < bins; ++k) {
      // Order statistic with linear interpolation at position (n-1) k / B.
      const double pos = static_cast<double>(n - 1) * k / bins;
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, static_cast<std::size_t>(n - 1));
      const double frac = pos - static_cast<double>(lo);
      const double edge = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
      // An edge at or below the minimum would leave the lowest cell empty.
      if (edge <= sorted.front()) continue;
      if (!out.empty() && !(edge > out.back())) continue;
      out.push_back(edge);
    }
  }
  return Quantizer(std::move(edges), bins);
}

std::vector<int> Quantizer::cell_counts() const {
  std::vector<int> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back(static_cast<int>(e.size()) + 1);
  return out;
}

int Quantizer::quantize(Index dim, double x) const {
  if (std::isnan(x)) throw DataError("quantize: NaN feature value");
  const auto& e = edges_[static_cast<std::size_t>(dim)];
  return static_cast<int>(std::upper_bound(e.begin(), e.end(), x) - e.begin());
}

Eigen::VectorXi Quantizer::quantize(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dims())
    throw DataError("quantize: expected " + std::to_string(dims()) + " dimensions, got " +
                    std::to_string(x.size()));
  Eigen::VectorXi out(x.size());
  for (Index d = 0; d < x.size(); ++d) out(d) = quantize(d, x(d));
  return out;
}

SymbolMatrix Quantizer::quantize_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != dims()) throw DataError("quantize: dimension mismatch");
  SymbolMatrix out(rows.rows(), rows.cols());
  for (Index d = 0; d < rows.cols(); ++d)
    for (Index r = 0; r < rows.rows(); ++r) out(r, d) = quantize(d, rows(r, d));
  return out;
}

void WeightedDataset::validate() const {
  if (labels.size() != symbols.rows() || weights.size() != symbols.rows())
    throw DataError("dataset: labels/weights length does not match sample count");
  if (static_cast<Index>(cells.size()) != symbols.cols())
    throw DataError("dataset: cell count list does not match variable count");
  if ((weights.array() < 0).any() || std::abs(weights.sum() - 1.0) > 1e-12)
    throw DataError("dataset: weights must be a probability distribution");
  for (Index v = 0; v < symbols.cols(); ++v) {
    const int c = cells[static_cast<std::size_t>(v)];
    if ((symbols.col(v).array() < 0).any() || (symbols.col(v).array() >= c).any())
      throw DataError("dataset: symbol out of range for variable " + std::to_string(v));
  }
}

WeightedDataset WeightedDataset::uniform(SymbolMatrix symbols, Eigen::VectorXi labels,
                                         std::vector<int> cells) {
  const Index n = symbols.rows();
  WeightedDataset ds{std::move(symbols), std::move(labels),
                     Eigen::VectorXd::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0),
                     std::move(cells)};
  return ds;
}

EmpiricalModel::EmpiricalModel(std::vector<Index> variables, std::vector<Eigen::VectorXd> marginals,
                               std::vector<Eigen::MatrixXd> pairs, double alpha)
    : variables_(std::move(variables)),
      marginals_(std::move(marginals)),
      pairs_(std::move(pairs)),
      alpha_(alpha) {
  const Index n = size();
  if (static_cast<Index>(marginals_.size()) != n) throw ConfigError("model: marginal count mismatch");
  if (static_cast<Index>(pairs_.size()) != n * (n - 1) / 2) throw ConfigError("model: pair count mismatch");
  Index max_id = -1;
  for (Index v : variables_) {
    if (v < 0) throw ConfigError("model: negative variable id");
    max_id = std::max(max_id, v);
  }
  lookup_.assign(static_cast<std::size_t>(max_id + 1), -1);
  for (Index i = 0; i < n; ++i) {
    auto& slot = lookup_[static_cast<std::size_t>(variables_[static_cast<std::size_t>(i)])];
    if (slot >= 0) throw ConfigError("model: duplicate variable id");
    slot = i;
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const auto& t = pairs_[static_cast<std::size_t>(pair_index(i, j, n))];
      if (t.rows() != cells(i) || t.cols() != cells(j)) throw ConfigError("model: pair table shape mismatch");
    }
}

bool EmpiricalModel::contains(Index variable) const {
  return variable >= 0 && variable < static_cast<Index>(lookup_.size()) &&
         lookup_[static_cast<std::size_t>(variable)] >= 0;
}

Index EmpiricalModel::local(Index variable) const {
  if (!contains(variable)) throw ConfigError("model: variable " + std::to_string(variable) + " not covered");
  return lookup_[static_cast<std::size_t>(variable)];
}

const Eigen::MatrixXd& EmpiricalModel::pair_at(Index i, Index j) const {
  return pairs_[static_cast<std::size_t>(pair_index(i, j, size()))];
}

Eigen::MatrixXd EmpiricalModel::joint(Index first, Index second) const {
  const Index i = local(first);
  const Index j = local(second);
  if (i == j) throw ConfigError("model: joint of a variable with itself");
  if (i < j) return pair_at(i, j);
  return pair_at(j, i).transpose();
}

EmpiricalModel fit_empirical_model(const WeightedDataset& ds, std::span<const Index> variables,
                                   double alpha, std::optional<int> label) {
  if (!(alpha > 0) || !std::isfinite(alpha)) throw ConfigError("empirical model: alpha must be positive");
  for (Index v : variables)
    if (v < 0 || v >= ds.variables()) throw ConfigError("empirical model: variable out of range");

  std::vector<Index> rows;
  double mass = 0.0;
  for (Index s = 0; s < ds.samples(); ++s) {
    if (label && ds.labels(s) != *label) continue;
    if (ds.weights(s) <= 0) continue;
    rows.push_back(s);
    mass += ds.weights(s);
  }
  if (rows.empty() || !(mass > 0)) throw DataError("empirical model: no training mass");
  const double norm = mass + alpha;

  const Index n = static_cast<Index>(variables.size());
  std::vector<Eigen::VectorXd> marginals(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Index v = variables[static_cast<std::size_t>(i)];
    const int c = ds.cells[static_cast<std::size_t>(v)];
    Eigen::VectorXd m = Eigen::VectorXd::Zero(c);
    for (Index s : rows) m(ds.symbols(s, v)) += ds.weights(s);
    marginals[static_cast<std::size_t>(i)] = (m.array() + alpha / c) / norm;
  }

  std::vector<std::pair<Index, Index>> pair_list;
  pair_list.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pair_list.emplace_back(i, j);

  std::vector<Eigen::MatrixXd> pairs(pair_list.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(pair_list.size()), [&](std::ptrdiff_t k) {
    const auto [i, j] = pair_list[static_cast<std::size_t>(k)];
    const Index vi = variables[static_cast<std::size_t>(i)];
    const Index vj = variables[static_cast<std::size_t>(j)];
    const int ci = ds.cells[static_cast<std::size_t>(vi)];
    const int cj = ds.cells[static_cast<std::size_t>(vj)];
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ci, cj);
    for (Index s : rows) t(ds.symbols(s, vi), ds.symbols(s, vj)) += ds.weights(s);
    pairs[static_cast<std::size_t>(k)] = (t.array() + alpha / (ci * cj)) / norm;
  });

  return EmpiricalModel(std::vector<Index>(variables.begin(), variables.end()), std::move(marginals),
                        std::move(pairs), alpha);
}

}  // namespace fusegraph
