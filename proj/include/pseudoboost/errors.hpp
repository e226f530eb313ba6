#pragma once

#include <stdexcept>
#include <string>

namespace pseudoboost {

// Length mismatch between two vectors, or between a vector and a model dimension.
struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Zero, NaN or infinite input where a usable direction or magnitude is required.
struct DegenerateInputError : std::invalid_argument {
    explicit DegenerateInputError(const std::string& what) : std::invalid_argument(what) {}
};

// Caller violated a documented contract (non-unit vector, empty batch, bad range, ...).
struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// A noise family could not be certified against the tail/density requirements.
struct CertificationError : std::runtime_error {
    explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

// An exact oracle was asked about a distribution it does not cover.
struct UnsupportedOracleError : std::runtime_error {
    explicit UnsupportedOracleError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration parse or validation failure; the message names the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The supervised stage handed off a pseudolabeler worse than the configured threshold.
struct PipelineAbortError : std::runtime_error {
    explicit PipelineAbortError(const std::string& what) : std::runtime_error(what) {}
};

// Every candidate iterate was the zero vector, so no pseudolabeler can be selected.
struct DegeneratePseudolabelerError : std::runtime_error {
    explicit DegeneratePseudolabelerError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pseudoboost
