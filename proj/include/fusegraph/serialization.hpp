#pragma once

#include <filesystem>
#include <string>

#include "fusegraph/fusion.hpp"

namespace fusegraph {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON documents. Doubles are written with round-trip precision, so a
/// loaded model reproduces the saved model's scores bit for bit.
std::string to_json_string(const MulticlassModel& model, int indent = -1);
std::string to_json_string(const BinaryFusionModel& model, int indent = -1);

MulticlassModel multiclass_from_json_string(const std::string& text);
BinaryFusionModel binary_from_json_string(const std::string& text);

void save_model(const MulticlassModel& model, const std::filesystem::path& path);
MulticlassModel load_model(const std::filesystem::path& path);

}  // namespace fusegraph
