#include "fusegraph/synth.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>

#include "json.hpp"

namespace fusegraph {

namespace {

struct Link {
  Index to;
  double strength;
};

/// Adjacency of the class-conditional forest.
std::vector<std::vector<Link>> adjacency(const SynthSpec& spec, bool is_p) {
  const FeatureLayout layout = spec.layout();
  std::vector<std::vector<Link>> adj(static_cast<std::size_t>(layout.total()));
  auto link = [&](Index a, Index b, double s) {
    adj[static_cast<std::size_t>(a)].push_back({b, s});
    adj[static_cast<std::size_t>(b)].push_back({a, s});
  };
  const double within = is_p ? spec.within_p : spec.within_q;
  for (Index set = 0; set < layout.sets(); ++set)
    for (Index k = 1; k < layout.dim(set); ++k) link(layout.offset(set) + k - 1, layout.offset(set) + k, within);
  if (is_p)
    for (const auto& [a, b] : spec.cross_pairs) link(a, b, spec.cross_strength);
  return adj;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int symbol(std::mt19937_64& rng, int symbols) { return static_cast<int>(rng() % static_cast<std::uint64_t>(symbols)); }

}  // namespace

void SynthSpec::validate() const {
  if (dims.empty()) throw ConfigError("synth: at least one feature set is required");
  const FeatureLayout lay = layout();
  if (symbols < 2) throw ConfigError("synth: at least two symbols are required");
  for (double s : {within_p, within_q, cross_strength})
    if (!(s >= 0.0 && s < 1.0)) throw ConfigError("synth: strengths must lie in [0, 1)");
  if (!(jitter > 0.0 && jitter <= 1.0)) throw ConfigError("synth: jitter must lie in (0, 1]");
  if (samples_p < 1 || samples_q < 1) throw ConfigError("synth: sample counts must be positive");
  if (class_names.size() != 2 || class_names[0] == class_names[1])
    throw ConfigError("synth: exactly two distinct class names are required");
  for (const auto& [a, b] : cross_pairs) {
    if (a < 0 || b < 0 || a >= lay.total() || b >= lay.total()) throw ConfigError("synth: cross pair out of range");
    if (lay.set_of(a) == lay.set_of(b)) throw ConfigError("synth: cross pairs must join different feature sets");
  }
  // Chains plus cross pairs must stay a forest.
  std::vector<Index> parent(static_cast<std::size_t>(lay.total()));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  };
  auto join = [&](Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) throw ConfigError("synth: coupling graph contains a cycle");
    parent[static_cast<std::size_t>(a)] = b;
  };
  for (Index set = 0; set < lay.sets(); ++set)
    for (Index k = 1; k < lay.dim(set); ++k) join(lay.offset(set) + k - 1, lay.offset(set) + k);
  for (const auto& [a, b] : cross_pairs) join(a, b);
}

LabeledFeatures synth_fusion_generator(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const FeatureLayout layout = spec.layout();
  const Index n_vars = layout.total();
  std::mt19937_64 rng(seed);

  LabeledFeatures data;
  data.class_names = spec.class_names;
  const Index total = spec.samples_p + spec.samples_q;
  Eigen::MatrixXd features(total, n_vars);

  for (int cls = 0; cls < 2; ++cls) {
    const bool is_p = cls == 0;
    const auto adj = adjacency(spec, is_p);
    // Fixed breadth-first order from the lowest id of each component.
    std::vector<std::pair<Index, Index>> order;  // (node, parent or -1)
    std::vector<double> strength(static_cast<std::size_t>(n_vars), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(n_vars), false);
    for (Index root = 0; root < n_vars; ++root) {
      if (seen[static_cast<std::size_t>(root)]) continue;
      std::queue<Index> frontier;
      frontier.push(root);
      seen[static_cast<std::size_t>(root)] = true;
      order.emplace_back(root, -1);
      while (!frontier.empty()) {
        const Index u = frontier.front();
        frontier.pop();
        for (const Link& l : adj[static_cast<std::size_t>(u)]) {
          if (seen[static_cast<std::size_t>(l.to)]) continue;
          seen[static_cast<std::size_t>(l.to)] = true;
          strength[static_cast<std::size_t>(l.to)] = l.strength;
          order.emplace_back(l.to, u);
          frontier.push(l.to);
        }
      }
    }
    const Index begin = is_p ? 0 : spec.samples_p;
    const Index count = is_p ? spec.samples_p : spec.samples_q;
    Eigen::VectorXi s(n_vars);
    for (Index r = begin; r < begin + count; ++r) {
      for (const auto& [node, parent] : order) {
        if (parent >= 0 && unit(rng) < strength[static_cast<std::size_t>(node)])
          s(node) = s(parent);
        else
          s(node) = symbol(rng, spec.symbols);
      }
      for (Index v = 0; v < n_vars; ++v) features(r, v) = s(v) + spec.jitter * unit(rng);
      data.labels.push_back(cls);
    }
  }
  for (Index set = 0; set < layout.sets(); ++set)
    data.sets.push_back(features.middleCols(layout.offset(set), layout.dim(set)));
  return data;
}

Eigen::MatrixXd synth_pair_pmf(const SynthSpec& spec, bool is_p, Index u, Index v) {
  spec.validate();
  const auto adj = adjacency(spec, is_p);
  const auto n = static_cast<Index>(adj.size());
  if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw ConfigError("synth: invalid variable pair");
  // Copy probability composes multiplicatively along the tree path.
  std::vector<double> reach(static_cast<std::size_t>(n), -1.0);
  std::queue<Index> frontier;
  reach[static_cast<std::size_t>(u)] = 1.0;
  frontier.push(u);
  while (!frontier.empty()) {
    const Index a = frontier.front();
    frontier.pop();
    for (const Link& l : adj[static_cast<std::size_t>(a)])
      if (reach[static_cast<std::size_t>(l.to)] < 0) {
        reach[static_cast<std::size_t>(l.to)] = reach[static_cast<std::size_t>(a)] * l.strength;
        frontier.push(l.to);
      }
  }
  const double rho = std::max(0.0, reach[static_cast<std::size_t>(v)]);
  const int c = spec.symbols;
  Eigen::MatrixXd pmf = Eigen::MatrixXd::Constant(c, c, (1.0 - rho) / (c * c));
  pmf.diagonal().array() += rho / c;
  return pmf;
}

SynthSpec synth_spec_from_json(const std::string& text) {
  using nlohmann::json;
  SynthSpec spec;
  try {
    const json j = json::parse(text);
    if (j.contains("feature_dims")) spec.dims = j.at("feature_dims").get<std::vector<Index>>();
    spec.symbols = j.value("symbols", spec.symbols);
    if (j.contains("within_strength")) {
      const auto& w = j.at("within_strength");
      if (w.is_number()) {
        spec.within_p = spec.within_q = w.get<double>();
      } else {
        spec.within_p = w.value("p", spec.within_p);
        spec.within_q = w.value("q", spec.within_q);
      }
    }
    spec.cross_strength = j.value("cross_strength", spec.cross_strength);
    spec.jitter = j.value("jitter", spec.jitter);
    if (j.contains("class_names")) spec.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (j.contains("samples_per_class")) {
      const auto& s = j.at("samples_per_class");
      if (s.is_array()) {
        spec.samples_p = s.at(0).get<Index>();
        spec.samples_q = s.at(1).get<Index>();
      } else {
        spec.samples_p = spec.samples_q = s.get<Index>();
      }
    }
    if (j.contains("cross_pairs")) {
      const FeatureLayout layout(spec.dims);
      spec.cross_pairs.clear();
      for (const auto& pair : j.at("cross_pairs")) {
        // [[set, var], [set, var]]
        auto global = [&](const json& at) {
          const Index set = at.at(0).get<Index>();
          const Index var = at.at(1).get<Index>();
          if (set < 0 || set >= layout.sets() || var < 0 || var >= layout.dim(set))
            throw ConfigError("synth: cross pair endpoint out of range");
          return layout.offset(set) + var;
        };
        spec.cross_pairs.emplace_back(global(pair.at(0)), global(pair.at(1)));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth: invalid spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
  using nlohmann::json;
  const FeatureLayout layout = spec.layout();
  json pairs = json::array();
  for (const auto& [a, b] : spec.cross_pairs) {
    const Index sa = layout.set_of(a);
    const Index sb = layout.set_of(b);
    pairs.push_back({{sa, a - layout.offset(sa)}, {sb, b - layout.offset(sb)}});
  }
  json j = {{"feature_dims", spec.dims},
            {"symbols", spec.symbols},
            {"within_strength", {{"p", spec.within_p}, {"q", spec.within_q}}},
            {"cross_strength", spec.cross_strength},
            {"cross_pairs", pairs},
            {"jitter", spec.jitter},
            {"samples_per_class", {spec.samples_p, spec.samples_q}},
            {"class_names", spec.class_names}};
  return j.dump(2);
}

}  // namespace fusegraph
