#pragma once

#include <stdexcept>
#include <string>

namespace cred {

// Operand shapes disagree (image/operator size mismatch).
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input data (PGM headers, JSON configs, CSV rows).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failure (missing file, short read, failed write).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A solver produced a non-finite iterate.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(int iteration)
        : std::runtime_error("solver diverged: non-finite iterate at iteration " +
                             std::to_string(iteration)),
          iteration(iteration) {}
    int iteration;
};

}  // namespace cred
