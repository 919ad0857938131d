#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fusegraph/dataset.hpp"
#include "fusegraph/wavelet.hpp"

namespace fusegraph {

inline constexpr int kChipSize = 64;

/// Square intensity grid; pixels(row, col).
struct ImageChip {
  Eigen::MatrixXd pixels;

  Index width() const { return pixels.cols(); }
  Index height() const { return pixels.rows(); }
};

/// Center-crops the largest square, resamples it bilinearly to target x target and
/// standardizes to zero mean and unit variance. Images with variance below 1e-12 are
/// only mean-centered.
ImageChip normalize_chip(const Eigen::MatrixXd& image, int target = kChipSize);

struct SubbandFeatures {
  Eigen::VectorXd ll, lh, hl;  // final level, flattened row-major
  int levels = 0;
  Wavelet wavelet = Wavelet::Haar;
};

SubbandFeatures dwt2_subbands(const ImageChip& chip, int levels, Wavelet wavelet = Wavelet::Haar);

Eigen::VectorXd flatten_row_major(const Eigen::MatrixXd& m);

/// Reads binary (P5) or ASCII (P2) PGM, 8 or 16 bit, scaled to [0, 1].
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& unit_image, int maxval = 255,
               bool binary = true);

struct TabularOptions {
  std::string label_column = "label";
  /// Classes that may appear; unset accepts any label in order of first appearance.
  std::optional<std::vector<std::string>> known_classes;
};

/// Comma-delimited text with a header row. Non-label columns are split into feature
/// sets according to `layout`.
LabeledFeatures load_tabular_features(const std::filesystem::path& path, const FeatureLayout& layout,
                                      const TabularOptions& options = {});

/// Like load_tabular_features but with a single feature set spanning every column.
LabeledFeatures load_tabular_features(const std::filesystem::path& path, const TabularOptions& options = {});

/// Writes a table readable by load_tabular_features; values use 17 significant digits.
void write_tabular_features(const std::filesystem::path& path, const LabeledFeatures& data,
                            const std::string& label_column = "label");

struct ManifestEntry {
  std::filesystem::path path;
  std::string label;
};

/// CSV with columns path,label; relative paths are resolved against the manifest directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// True if the file's header is exactly "path,label".
bool is_image_manifest(const std::filesystem::path& path);

/// Reads, normalizes and decomposes every image into the LL, LH and HL feature sets.
LabeledFeatures extract_features(const std::vector<ManifestEntry>& manifest, int levels, Wavelet wavelet,
                                 const std::optional<std::vector<std::string>>& known_classes = std::nullopt);

}  // namespace fusegraph
