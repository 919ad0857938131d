#include "fusegraph/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace fusegraph {

using nlohmann::json;

namespace {

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ConfigError("model: invalid number '" + s + "'");
  }
  return j.get<double>();
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  const auto cols = rows ? static_cast<Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Index>(row.size()) != cols) throw ConfigError("model: ragged table");
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json tree_json(const TreeGraph& tree) {
  json edges = json::array();
  for (const Edge& e : tree.edges()) edges.push_back({e.u, e.v});
  json node_log = json::array();
  for (const auto& t : tree.node_log()) node_log.push_back(vector_json(t));
  json edge_log = json::array();
  for (const auto& t : tree.edge_log_ratio()) edge_log.push_back(matrix_json(t));
  const auto& prov = tree.provenance();
  return {{"nodes", tree.nodes()},
          {"edges", edges},
          {"node_log", node_log},
          {"edge_log", edge_log},
          {"kind", prov.kind == TreeKind::Generative ? "generative" : "discriminative"},
          {"distribution", std::string(1, prov.distribution)},
          {"iteration", prov.iteration}};
}

TreeGraph tree_from(const json& j) {
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    const Index u = e.at(0).get<Index>();
    const Index v = e.at(1).get<Index>();
    if (u >= v) throw ConfigError("model: edges must be stored with u < v");
    edges.emplace_back(u, v);
  }
  std::vector<Eigen::VectorXd> node_log;
  for (const auto& t : j.at("node_log")) node_log.push_back(vector_from(t));
  std::vector<Eigen::MatrixXd> edge_log;
  for (const auto& t : j.at("edge_log")) edge_log.push_back(matrix_from(t));
  Provenance prov;
  prov.kind = j.at("kind").get<std::string>() == "generative" ? TreeKind::Generative : TreeKind::Discriminative;
  prov.distribution = j.at("distribution").get<std::string>().at(0);
  prov.iteration = j.at("iteration").get<int>();
  return TreeGraph(j.at("nodes").get<std::vector<Index>>(), std::move(node_log), std::move(edges),
                   std::move(edge_log), prov);
}

json binary_json(const BinaryFusionModel& model) {
  json quantizers = json::array();
  for (const auto& q : model.quantizers) quantizers.push_back({{"bins", q.bins()}, {"edges", q.all_edges()}});
  json rounds = json::array();
  for (const auto& r : model.boosted.rounds) {
    rounds.push_back({{"iteration", r.pair.iteration},
                      {"epsilon", r.epsilon},
                      {"beta", r.beta},
                      {"z_norm", r.z_norm},
                      {"j_divergence", number(r.j_divergence)},
                      {"tree_p", tree_json(r.pair.tree_p)},
                      {"tree_q", tree_json(r.pair.tree_q)}});
  }
  return {{"p_label", model.p_label},
          {"q_label", model.q_label},
          {"tau", number(model.tau())},
          {"llr_clamp", model.boosted.llr_clamp},
          {"layout", model.layout.dims()},
          {"quantizers", quantizers},
          {"rounds", rounds}};
}

BinaryFusionModel binary_from(const json& j) {
  BinaryFusionModel model;
  model.p_label = j.at("p_label").get<std::string>();
  model.q_label = j.at("q_label").get<std::string>();
  model.layout = FeatureLayout(j.at("layout").get<std::vector<Index>>());
  for (const auto& q : j.at("quantizers"))
    model.quantizers.emplace_back(q.at("edges").get<std::vector<std::vector<double>>>(), q.at("bins").get<int>());
  if (static_cast<Index>(model.quantizers.size()) != model.layout.sets())
    throw ConfigError("model: quantizer count does not match layout");
  for (Index s = 0; s < model.layout.sets(); ++s)
    if (model.quantizers[static_cast<std::size_t>(s)].dims() != model.layout.dim(s))
      throw ConfigError("model: quantizer dimension does not match layout");
  model.boosted.layout = model.layout;
  model.boosted.llr_clamp = j.at("llr_clamp").get<double>();
  model.boosted.tau = number(j.at("tau"));
  for (const auto& r : j.at("rounds")) {
    BoostRound round;
    round.pair.iteration = r.at("iteration").get<int>();
    round.epsilon = r.at("epsilon").get<double>();
    round.beta = r.at("beta").get<double>();
    round.z_norm = r.at("z_norm").get<double>();
    round.j_divergence = number(r.at("j_divergence"));
    round.pair.j_divergence = round.j_divergence;
    round.pair.tree_p = tree_from(r.at("tree_p"));
    round.pair.tree_q = tree_from(r.at("tree_q"));
    if (static_cast<Index>(round.pair.tree_p.nodes().size()) != model.layout.total())
      throw ConfigError("model: tree node count does not match layout");
    model.boosted.rounds.push_back(std::move(round));
  }
  return model;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model: invalid JSON: ") + e.what());
  }
}

void check_header(const json& doc, const std::string& kind) {
  if (!doc.contains("format_version") || doc.at("format_version").get<int>() != kModelFormatVersion)
    throw ConfigError("model: unsupported format_version");
  if (doc.value("kind", "") != kind) throw ConfigError("model: expected a " + kind + " model document");
}

template <typename Fn>
auto guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: malformed document: ") + e.what());
  }
}

}  // namespace

std::string to_json_string(const BinaryFusionModel& model, int indent) {
  json doc = binary_json(model);
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = "binary";
  return doc.dump(indent);
}

std::string to_json_string(const MulticlassModel& model, int indent) {
  json subs = json::array();
  for (const auto& m : model.submodels) subs.push_back(binary_json(m));
  json doc = {{"format_version", kModelFormatVersion},
              {"kind", "multiclass"},
              {"layout", model.layout().dims()},
              {"class_names", model.class_names},
              {"tau_out", number(model.tau_out)},
              {"submodels", subs}};
  return doc.dump(indent);
}

BinaryFusionModel binary_from_json_string(const std::string& text) {
  return guarded([&] {
    const json doc = parse(text);
    check_header(doc, "binary");
    return binary_from(doc);
  });
}

MulticlassModel multiclass_from_json_string(const std::string& text) {
  return guarded([&] {
    const json doc = parse(text);
    check_header(doc, "multiclass");
    MulticlassModel model;
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
    model.tau_out = number(doc.at("tau_out"));
    for (const auto& s : doc.at("submodels")) model.submodels.push_back(binary_from(s));
    if (model.submodels.size() != model.class_names.size())
      throw ConfigError("model: class name count does not match submodels");
    for (const auto& s : model.submodels)
      if (!(s.layout == model.submodels.front().layout)) throw ConfigError("model: submodel layouts differ");
    return model;
  });
}

void save_model(const MulticlassModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json_string(model, 1) << '\n';
  if (!out) throw DataError("write failed for " + path.string());
}

MulticlassModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return multiclass_from_json_string(buf.str());
}

}  // namespace fusegraph
