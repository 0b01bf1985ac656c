#pragma once

#include <stdexcept>
#include <string>

namespace heatcast {

// Error categories map onto CLI exit codes: config -> 1, data -> 2,
// numerical -> 3 (see tools/).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace heatcast
