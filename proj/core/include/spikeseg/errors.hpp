#pragma once

#include <stdexcept>
#include <string>

namespace spikeseg {

// Dimension / shape violations on tensor ops.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration values or unknown config keys.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed files (checkpoints, volumes, configs on disk).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf surfaced during training, or misuse of the training API.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spikeseg
