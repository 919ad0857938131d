#pragma once

#include <stdexcept>
#include <string>

namespace fusegraph {

/// Malformed, non-finite or otherwise unusable input data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent options, layouts or model parameters.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace fusegraph
