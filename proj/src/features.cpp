#include "fusegraph/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fusegraph {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

ImageChip normalize_chip(const Eigen::MatrixXd& image, int target) {
  if (image.rows() < 1 || image.cols() < 1) throw DataError("normalize_chip: empty image");
  if (target < 1) throw ConfigError("normalize_chip: target size must be positive");
  if (!image.allFinite()) throw DataError("normalize_chip: non-finite pixel");
  const Index side = std::min(image.rows(), image.cols());
  const Index r0 = (image.rows() - side) / 2;
  const Index c0 = (image.cols() - side) / 2;
  const Eigen::MatrixXd square = image.block(r0, c0, side, side);

  auto source = [&](Index d, Index& lo, Index& hi, double& frac) {
    double s = (static_cast<double>(d) + 0.5) * static_cast<double>(side) / target - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(side - 1));
    lo = static_cast<Index>(std::floor(s));
    hi = std::min(lo + 1, side - 1);
    frac = s - static_cast<double>(lo);
  };
  Eigen::MatrixXd out(target, target);
  for (Index r = 0; r < target; ++r) {
    Index r_lo, r_hi;
    double fr;
    source(r, r_lo, r_hi, fr);
    for (Index c = 0; c < target; ++c) {
      Index c_lo, c_hi;
      double fc;
      source(c, c_lo, c_hi, fc);
      const double top = square(r_lo, c_lo) + fc * (square(r_lo, c_hi) - square(r_lo, c_lo));
      const double bottom = square(r_hi, c_lo) + fc * (square(r_hi, c_hi) - square(r_hi, c_lo));
      out(r, c) = top + fr * (bottom - top);
    }
  }
  out.array() -= out.mean();
  const double variance = out.squaredNorm() / static_cast<double>(out.size());
  if (variance >= 1e-12) out /= std::sqrt(variance);
  return {std::move(out)};
}

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(m.size());
  Index k = 0;
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) v(k++) = m(r, c);
  return v;
}

SubbandFeatures dwt2_subbands(const ImageChip& chip, int levels, Wavelet wavelet) {
  const auto bands = dwt2(chip.pixels, levels, wavelet);
  return {flatten_row_major(bands.ll), flatten_row_major(bands.lh), flatten_row_major(bands.hl), levels, wavelet};
}

Eigen::MatrixXd read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read image " + path.string());
  auto token = [&]() {
    std::string t;
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string comment;
        std::getline(in, comment);
        if (!t.empty()) break;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        continue;
      }
      t.push_back(c);
    }
    if (t.empty()) throw DataError(path.string() + ": truncated PGM header");
    return t;
  };
  auto integer = [&]() {
    const std::string t = token();
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) throw DataError(path.string() + ": invalid PGM header value '" + t + "'");
    return v;
  };
  const std::string magic = token();
  if (magic != "P5" && magic != "P2") throw DataError(path.string() + ": not a PGM file (magic " + magic + ")");
  const long width = integer();
  const long height = integer();
  const long maxval = integer();
  if (maxval > 65535) throw DataError(path.string() + ": PGM maxval exceeds 65535");
  Eigen::MatrixXd image(height, width);
  for (long r = 0; r < height; ++r)
    for (long c = 0; c < width; ++c) {
      long v = 0;
      if (magic == "P2") {
        v = std::strtol(token().c_str(), nullptr, 10);
      } else if (maxval < 256) {
        const int b = in.get();
        if (b == EOF) throw DataError(path.string() + ": truncated PGM data");
        v = b;
      } else {
        const int hi = in.get();
        const int lo = in.get();
        if (lo == EOF) throw DataError(path.string() + ": truncated PGM data");
        v = (hi << 8) | lo;
      }
      if (v < 0 || v > maxval) throw DataError(path.string() + ": PGM sample exceeds maxval");
      image(r, c) = static_cast<double>(v) / static_cast<double>(maxval);
    }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& unit_image, int maxval, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image " + path.string());
  out << (binary ? "P5" : "P2") << "\n" << unit_image.cols() << " " << unit_image.rows() << "\n" << maxval << "\n";
  for (Index r = 0; r < unit_image.rows(); ++r) {
    for (Index c = 0; c < unit_image.cols(); ++c) {
      const auto v = static_cast<int>(std::lround(std::clamp(unit_image(r, c), 0.0, 1.0) * maxval));
      if (!binary) {
        out << v << (c + 1 == unit_image.cols() ? '\n' : ' ');
      } else if (maxval < 256) {
        out.put(static_cast<char>(v));
      } else {
        out.put(static_cast<char>(v >> 8));
        out.put(static_cast<char>(v & 0xff));
      }
    }
  }
}

LabeledFeatures load_tabular_features(const std::filesystem::path& path, const FeatureLayout& layout,
                                      const TabularOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (read_line(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_csv(line);
      break;
    }
  }
  if (header.empty()) throw DataError(path.string() + ": no samples");
  const auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end())
    throw DataError(where(path, lineno) + "missing label column '" + options.label_column + "'");
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  const auto feature_count = static_cast<Index>(header.size() - 1);
  if (layout.total() != feature_count)
    throw ConfigError(path.string() + ": layout covers " + std::to_string(layout.total()) + " columns but file has " +
                      std::to_string(feature_count) + " feature columns");

  LabeledFeatures data;
  if (options.known_classes) data.class_names = *options.known_classes;
  std::vector<std::vector<double>> rows;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw DataError(where(path, lineno) + "expected " + std::to_string(header.size()) + " columns, found " +
                      std::to_string(cells.size()));
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(feature_count));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_col) continue;
      const char* begin = cells[c].c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (cells[c].empty() || *end != '\0' || !std::isfinite(v))
        throw DataError(where(path, lineno) + "non-numeric value '" + cells[c] + "' in column '" + header[c] + "'");
      values.push_back(v);
    }
    const std::string& label = cells[label_col];
    auto known = std::find(data.class_names.begin(), data.class_names.end(), label);
    if (known == data.class_names.end()) {
      if (options.known_classes) throw DataError(where(path, lineno) + "unknown label '" + label + "'");
      data.class_names.push_back(label);
      known = data.class_names.end() - 1;
    }
    data.labels.push_back(static_cast<int>(known - data.class_names.begin()));
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError(path.string() + ": no samples");

  const auto n = static_cast<Index>(rows.size());
  for (Index set = 0; set < layout.sets(); ++set) {
    Eigen::MatrixXd m(n, layout.dim(set));
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < layout.dim(set); ++c)
        m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(layout.offset(set) + c)];
    data.sets.push_back(std::move(m));
  }
  return data;
}

LabeledFeatures load_tabular_features(const std::filesystem::path& path, const TabularOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  while (read_line(in, line)) {
    if (trim(line).empty()) continue;
    const auto columns = static_cast<Index>(split_csv(line).size());
    if (columns < 2) throw DataError(path.string() + ": no feature columns");
    return load_tabular_features(path, FeatureLayout({columns - 1}), options);
  }
  throw DataError(path.string() + ": no samples");
}

void write_tabular_features(const std::filesystem::path& path, const LabeledFeatures& data,
                            const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  const Index n = data.samples();
  if (static_cast<Index>(data.labels.size()) != n) throw DataError("write: label count mismatch");
  out << label_column;
  for (std::size_t s = 0; s < data.sets.size(); ++s)
    for (Index c = 0; c < data.sets[s].cols(); ++c) out << ",s" << s << "_f" << c;
  out << '\n' << std::setprecision(17);
  for (Index r = 0; r < n; ++r) {
    out << data.class_names.at(static_cast<std::size_t>(data.labels[static_cast<std::size_t>(r)]));
    for (const auto& m : data.sets)
      for (Index c = 0; c < m.cols(); ++c) out << ',' << m(r, c);
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

bool is_image_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  while (read_line(in, line)) {
    if (trim(line).empty()) continue;
    const auto header = split_csv(line);
    return header.size() == 2 && header[0] == "path" && header[1] == "label";
  }
  return false;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  if (!is_image_manifest(path)) throw DataError(path.string() + ": expected an image manifest with header path,label");
  std::ifstream in(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<ManifestEntry> entries;
  bool header = true;
  while (read_line(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 2 || cells[0].empty()) throw DataError(where(path, lineno) + "expected path,label");
    std::filesystem::path image = cells[0];
    if (image.is_relative()) image = path.parent_path() / image;
    entries.push_back({image, cells[1]});
  }
  if (entries.empty()) throw DataError(path.string() + ": no samples");
  return entries;
}

LabeledFeatures extract_features(const std::vector<ManifestEntry>& manifest, int levels, Wavelet wavelet,
                                 const std::optional<std::vector<std::string>>& known_classes) {
  if (manifest.empty()) throw DataError("extract: no samples");
  std::vector<SubbandFeatures> features;
  LabeledFeatures data;
  if (known_classes) data.class_names = *known_classes;
  for (const auto& entry : manifest) {
    features.push_back(dwt2_subbands(normalize_chip(read_pgm(entry.path)), levels, wavelet));
    auto it = std::find(data.class_names.begin(), data.class_names.end(), entry.label);
    if (it == data.class_names.end()) {
      if (known_classes) throw DataError(entry.path.string() + ": unknown label '" + entry.label + "'");
      data.class_names.push_back(entry.label);
      it = data.class_names.end() - 1;
    }
    data.labels.push_back(static_cast<int>(it - data.class_names.begin()));
  }
  const auto n = static_cast<Index>(features.size());
  const Index dim = features.front().ll.size();
  data.sets.assign(3, Eigen::MatrixXd(n, dim));
  for (Index r = 0; r < n; ++r) {
    const auto& f = features[static_cast<std::size_t>(r)];
    data.sets[0].row(r) = f.ll.transpose();
    data.sets[1].row(r) = f.lh.transpose();
    data.sets[2].row(r) = f.hl.transpose();
  }
  return data;
}

}  // namespace fusegraph
