#pragma once

#include <stdexcept>
#include <string>

namespace bqpg {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpectrumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bqpg
