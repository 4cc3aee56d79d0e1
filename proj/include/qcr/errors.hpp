#pragma once

#include <stdexcept>
#include <string>

namespace qcr {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, NumericalError -> 3, FitError -> 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : ConfigError {
    explicit ValidationError(const std::string& msg) : ConfigError(msg) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitError : std::runtime_error {
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qcr
