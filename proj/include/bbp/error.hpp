#pragma once

#include <stdexcept>
#include <string>

namespace bbp {

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge or hit an ill-defined region.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bbp
